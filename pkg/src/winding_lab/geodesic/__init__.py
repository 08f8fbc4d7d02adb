"""(G, gᵃ) 的测地流, 叶测度与测地线缠绕"""

from .leaf import LeafElement as LeafElement
from .leaf import asymptotic_endpoints as asymptotic_endpoints
from .leaf import leaf_distance as leaf_distance
from .leaf import leaf_parameter_from_distance as leaf_parameter_from_distance
from .leaf import lift_to_leaf as lift_to_leaf
from .leaf import orientation_type as orientation_type
from .leaf import projected_circle as projected_circle
from .leaf import projection_speed as projection_speed
from .liouville import LiouvilleSample as LiouvilleSample
from .liouville import sample_leaf as sample_leaf
from .liouville import sample_liouville as sample_liouville
from .liouville import sample_liouville_arrays as sample_liouville_arrays
from .params import GeodesicParams as GeodesicParams
from .params import body_components as body_components
from .params import constants_from_initial as constants_from_initial
from .params import flow as flow
from .params import flow_arrays as flow_arrays
from .params import tangent_from_body as tangent_from_body
from .params import unwrapped_theta as unwrapped_theta
from .params import velocity as velocity
from .winding import GeodesicConfig as GeodesicConfig
from .winding import GeodesicStepper as GeodesicStepper
from .winding import batch_geodesic_winding as batch_geodesic_winding
from .winding import geodesic_winding as geodesic_winding
from .winding import initial_leaf as initial_leaf
from .winding import integrate_chunk as integrate_chunk
