"""Phase-linked discrete Bayesian networks for flight-delay propagation."""

from .discretize import BinScheme, empirical_density, delay_bin_scheme
from .flightdata import (FlightLegRecord, DerivedDelays, GdpVars,
                         parse_records, write_records, derive_delays,
                         derive_gdp, throughput)
from .regression import PiecewiseRegression, fit_piecewise, predict_mean
from .network import (NetworkSpec, NodeSpec, ConditionalTable, Network,
                      build_network, regression_to_cpt, dirichlet_update,
                      train_network)
from .inference import (posterior, expected_value, map_state, forward_sample,
                        log_likelihood, markov_blanket_mean, PosteriorSet)
from .evaluation import (split_by_date, approx_mse, scaled_mse, weight_sweep,
                         blanket_sq_error, ll_comparison, evaluate_network)
from .synth import GroundTruth, generate, default_scenario, load_scenario
from .jsonio import canonical_json, dump_network, load_network

__version__ = "0.1.0"
