from .ecf import EcfReport as EcfReport
from .ecf import default_q_grid as default_q_grid
from .ecf import ecf as ecf
from .ecf import jackknife_stderr as jackknife_stderr
from .excursion import ExcursionTolerances as ExcursionTolerances
from .excursion import excursion_report as excursion_report
from .excursion import mean_duration as mean_duration
from .excursion import occupation_report as occupation_report
from .excursion import rate_limit as rate_limit
from .hitting import HittingSummary as HittingSummary
from .hitting import bessel_series as bessel_series
from .hitting import hitting_target_cf as hitting_target_cf
from .hitting import hitting_time_check as hitting_time_check
from .laws import CauchyTarget as CauchyTarget
from .laws import CfTarget as CfTarget
from .laws import GaussianTarget as GaussianTarget
from .laws import LawTestResult as LawTestResult
from .laws import fit_scale as fit_scale
from .laws import geodesic_factors as geodesic_factors
from .laws import increment_independence as increment_independence
from .laws import independence_test as independence_test
from .laws import law_test as law_test
from .laws import relative_check as relative_check
from .laws import target_cf as target_cf
from .laws import target_law as target_law
from .spheres import CellPartition as CellPartition
from .spheres import SphereResult as SphereResult
from .spheres import cell_masses as cell_masses
from .spheres import cell_partition as cell_partition
from .spheres import quasi_sphere_equidistribution as quasi_sphere_equidistribution
from .spheres import rectangle_area as rectangle_area
from .spheres import sphere_equidistribution as sphere_equidistribution
