"""Γ\\G 上的左 Brownian 运动与缠绕积分"""

from .engine import ChunkResult as ChunkResult
from .engine import batch_simulate as batch_simulate
from .engine import checkpoint_times as checkpoint_times
from .engine import simulate_chunk as simulate_chunk
from .engine import simulate_winding as simulate_winding
from .excursions import ExcursionState as ExcursionState
from .excursions import ExcursionTracker as ExcursionTracker
from .excursions import Trajectory as Trajectory
from .excursions import entry_level as entry_level
from .excursions import extract_excursions as extract_excursions
from .scheme import BrownianState as BrownianState
from .scheme import StepConfig as StepConfig
from .scheme import step as step
