"""调和 1-形式: ω₀, q-expansion 奇异形式与尖点形式"""

from ..constants import FormName
from ..exception import UnknownFormException
from ..modular_group import ModularGroupSpec
from .base import Covector as Covector
from .base import HarmonicFormSpec as HarmonicFormSpec
from .base import evaluate_form as evaluate_form
from .eta import Omega0Form as Omega0Form
from .eta import eisenstein_e2 as eisenstein_e2
from .eta import eta_log_derivative as eta_log_derivative
from .eta import primitive_increment_omega0 as primitive_increment_omega0
from .integrals import PeterssonEstimate as PeterssonEstimate
from .integrals import line_integral as line_integral
from .integrals import petersson_norm as petersson_norm
from .integrals import petersson_norm_quadrature as petersson_norm_quadrature
from .qexpansion import CuspExpansion as CuspExpansion
from .qexpansion import Eta4CuspForm as Eta4CuspForm
from .qexpansion import QExpansionForm as QExpansionForm
from .qexpansion import eta4_coefficients as eta4_coefficients
from .qexpansion import eta4_q_series as eta4_q_series
from .qexpansion import form_from_config as form_from_config
from .qexpansion import form_to_config as form_to_config


def builtin_form(name: str | FormName, group: ModularGroupSpec | None = None) -> HarmonicFormSpec:
    """内置形式 OMEGA0 / ETA4_CUSPFORM

    Args:
        name: 形式名称
        group: 所在模群, None 时取该形式的默认群

    Raises:
        UnknownFormException: 未知名称
        FormException: 形式与模群不兼容
    """
    key = str(name).upper()
    for cls in HarmonicFormSpec.get_all_subclass():
        if cls.builtin is not None and cls.builtin.value == key:
            return cls(group) if group is not None else cls()  # type: ignore[call-arg]
    raise UnknownFormException(str(name))
