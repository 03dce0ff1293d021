"""Desk-scale V2V spectrum-sharing simulator with a decentralized deep-Q
resource allocator and a random-allocation baseline."""

from .channel import (ChannelState, LargeScale, build_channel_state,
                      build_large_scale, channel_checksum, db_to_linear,
                      linear_to_db, path_loss_v2i, path_loss_v2v,
                      sample_fast_fading, sample_shadowing)
from .config import SimConfig
from .environment import (Action, Observation, StepOutcome, V2VEnv, capacity,
                          reward, sinr_v2i, sinr_v2v)
from .errors import (ConfigError, ContractError, TrainingError, V2VRLError)
from .geometry import (RoadLayout, V2VLink, Vehicle, form_links,
                       highway_layout, layout_from_config, manhattan_layout,
                       region_center, spawn_vehicles, step_positions)
from .policies import (greedy_return, oracle_best_return, random_action,
                       rollout_return)
from .qnet import (Gradient, QNetwork, backward, backward_batch, copy_params,
                   forward, forward_batch, gradient_check, init_qnetwork,
                   load_checkpoint, save_checkpoint, sgd_update)
from .replay import ReplayMemory, Transition
from .rng import rng_stream
from .sweep import SweepRow, run_sweep, write_sweep_csv, write_training_log
from .trainer import (EvalResult, TrainerConfig, TrainResult, epsilon,
                      evaluate, select_action, td_target, train)

__version__ = "0.1.0"
