"""Simulator for intermittent CSI updating in a joint communication and
sensing downlink: channel aging and pilot re-estimation, EKF target
tracking with error-bound surrogates, FP/SCA transmit beamforming, an
online-learned binary updating policy, and reference policies with an
experiment harness.
"""

from .baselines import (all_update_decision, enumerate_binary_vectors,
                        exhaustive_decision, random_decision,
                        run_baseline_frame)
from .beamforming import (CommEval, P2Batch, P2Result, RadarEval,
                          SolverOptions, build_batch, evaluate_batch,
                          evaluate_utility, mrt_beamformer, solve_p2,
                          solve_p2_batch)
from .comm import (CommChannelState, effective_rate, evolve_true_channel,
                   kappa_mmse, update_csi)
from .config import (CommUserParams, RadarTargetParams, RngStreams,
                     SystemConfig, build_scenario, load_scenario,
                     make_config)
from .drol import (DrolLearner, DrolOptions, critic_select, featurize,
                   generate_candidates, load_checkpoint,
                   order_preserving_quantize, practical_decision,
                   refine_exploration_params, run_frame, save_checkpoint,
                   train_step)
from .harness import (RunOptions, estimation_frequency, moving_average,
                      read_records_csv, relative_utility_ratio,
                      run_experiment, write_records_csv)
from .radar import (TrackState, crb_coefficients, ekf_step, ekf_update,
                    evolve_true_state, gamma_jacobian, gamma_transition,
                    predict_track, radar_performance, sensing_gain,
                    steering_vector)
from .world import (FrameContext, FrameRecord, World, advance,
                    copy_estimates, init_world, make_context, restore,
                    snapshot)

__version__ = "0.1.0"
