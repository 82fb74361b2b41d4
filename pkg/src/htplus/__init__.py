"""HashTag+ erasure codes: systematic MDS codes with flexible
sub-packetization and cheap repair of every node."""

from .base import (BaseCode, CodeParams, IndexArrays, NodePartition,
                   assign_coefficients, build_index_arrays, build_partition,
                   encode_base)
from .codec import decode_any_k, encode
from .gf import Field, FieldSpec, field_for
from .plus import PlusCode, build_plus_code, encode_plus, make_code, unpair
from .repair import (BandwidthReport, RepairPlan, execute_repair,
                     measure_bandwidth, optimal_bandwidth, parity_bandwidth,
                     plan_parity_repair, plan_repair, plan_systematic_repair,
                     systematic_bounds)
from .shardio import ShardHeader, read_shard, write_shard
from .verifier import exhaustive_repair_check, verify_mds

__version__ = "0.1.0"

__all__ = [
    "BaseCode", "BandwidthReport", "CodeParams", "Field", "FieldSpec",
    "IndexArrays", "NodePartition", "PlusCode", "RepairPlan", "ShardHeader",
    "assign_coefficients", "build_index_arrays", "build_partition",
    "build_plus_code", "decode_any_k", "encode", "encode_base", "encode_plus",
    "execute_repair", "exhaustive_repair_check", "field_for", "make_code",
    "measure_bandwidth", "optimal_bandwidth", "parity_bandwidth",
    "plan_parity_repair", "plan_repair", "plan_systematic_repair",
    "read_shard", "systematic_bounds", "unpair", "verify_mds", "write_shard",
]
