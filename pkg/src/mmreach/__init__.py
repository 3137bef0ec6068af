"""Interval reachability for neural ODEs via mixed-monotone embeddings."""

from .integrate import IntegrationError, IntegratorConfig, Trajectory, flow, integrate, sensitivity
from .interval import Interval, IntervalMatrix, IntervalVector, hull
from .jacobian import JacobianBounds, bound_field, bound_jacobian
from .model import NeuralOdeModel, eval_field, eval_jacobian, fpa_model, load_model, save_model
from .oracle import check_soundness, sample_successors, tightness
from .reach import ReachError, ReachResult, ReachSpec, reach
from .tube import TubeEstimate, tube_lipschitz, tube_monte_carlo

__version__ = "0.1.0"
