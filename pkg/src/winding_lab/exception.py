class LabException(Exception):
    """异常基类"""

    def __init__(self, message: str):
        self.message = message


class ConfigException(LabException):
    """配置异常"""

    def __init__(self, message: str | None = None):
        self.message = message or "配置无效"


class UnknownGroupException(ConfigException):
    """未知模群"""

    def __init__(self, name: str):
        self.message = f"unknown group: {name}"


class UnknownFormException(ConfigException):
    """未知调和形式"""

    def __init__(self, name: str):
        self.message = f"unknown form: {name}"


class FormException(LabException):
    """形式求值异常"""

    def __init__(self, message: str | None = None):
        self.message = message or "form evaluation failed"


class ReductionException(LabException):
    """基本域约化未收敛"""

    def __init__(self, z: complex):
        self.message = f"reduction of {z} did not terminate"


class GeodesicException(LabException):
    """测地线参数异常"""

    def __init__(self, message: str | None = None):
        self.message = message or "inconsistent geodesic data"


class MetricParamException(LabException):
    """度量参数 a = 0"""

    def __init__(self):
        self.message = "metric parameter a must be nonzero here"


class NonFiniteException(LabException):
    """非有限输入"""

    def __init__(self, what: str = "input"):
        self.message = f"non-finite {what}"


class TooFewSamplesException(LabException):
    """样本数不足"""

    def __init__(self, n: int, minimum: int):
        self.message = f"{n} samples, at least {minimum} required"
