"""Classical block-coding simulation of spin-direction transmission.

Simulates the statistics of sending N spin-1/2 particles with N classical
bits: a shared random codebook of guess blocks, jointly typical encoding,
and the information measures (entropy, mutual information, capacity,
typical sets) that size the codebook.  Includes a small dense quantum
oracle that produces the target Born-rule statistics, an equal-area
sphere-patch baseline, and resource calculators for classical frames.
"""

from ._kernels import BACKEND
from .directions import (DEFAULT_SCORE, Direction, DirectionSet, ScoreFunction,
                         SpherePartition, build_band_partition, default_score,
                         patch_index)
from .frames import bits_for_angle, frame_size_lower_bound, spins_for_angle
from .info import (Distribution, JointDistribution, channel_capacity,
                   conditional_entropy, entropy, holevo_check,
                   mutual_information)
from .protocol import (Codebook, ProtocolRun, codebook_size, decode, encode,
                       estimate_single_copy_marginals, exact_small_oracle,
                       fidelity_gap, make_codebook, run_protocol, simulate)
from .quantum import (Povm, PureState, QuantumChannelSpec, born_joint,
                      product_state, random_channel_spec)
from .typicality import (SymbolSequence, TypicalityParams,
                         empirical_pair_counts, is_jointly_typical,
                         is_strongly_typical, joint_typicality_rate)

__version__ = "0.1.0"
