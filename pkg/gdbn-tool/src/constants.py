from enum import Enum

FORMAT_VERSION = 1
TOOL_VERSION = "1.0.0"

SEED_ENVVAR = "GDBN_SEED"

# region defaults

DEFAULT_ITERATIONS = 100_000
DEFAULT_BURN_IN_FRACTION = 0.5
DEFAULT_THINNING = 100
DEFAULT_LAMBDA2 = 1.0
DEFAULT_ALPHA_MU = 1.0
DEFAULT_NOISE_VAR = 4.0
COEFFICIENT_MAGNITUDE_RANGE = (0.5, 2.0)

# brute-force equivalence classes refuse instances with more static nodes than this
ENUMERATION_CAP = 4

# factorization pivots below this fraction of the largest diagonal entry are treated as degenerate
PIVOT_TOLERANCE = 1e-12

PROGRESS_REFRESH_INTERVAL = 1000

# endregion


class Models(str, Enum):
    mbge = "mbge"
    ebge = "ebge"

    def __str__(self) -> str:
        return str(self.value)


class CpdagModes(str, Enum):
    mbge = "mbge"
    ebge = "ebge"
    naive = "naive"
    static = "static"


class EquivalenceModes(str, Enum):
    standard = "standard"
    ts = "ts"


class EdgeKinds(str, Enum):
    static = "S"
    dynamic = "D"
    undirected = "U"


class MoveKinds(str, Enum):
    static_add = "static_add"
    static_delete = "static_delete"
    static_reverse = "static_reverse"
    dynamic_add = "dynamic_add"
    dynamic_delete = "dynamic_delete"

    @property
    def is_static(self) -> bool:
        return self in (MoveKinds.static_add, MoveKinds.static_delete, MoveKinds.static_reverse)

    @property
    def inverse(self) -> "MoveKinds":
        return {
            MoveKinds.static_add: MoveKinds.static_delete,
            MoveKinds.static_delete: MoveKinds.static_add,
            MoveKinds.static_reverse: MoveKinds.static_reverse,
            MoveKinds.dynamic_add: MoveKinds.dynamic_delete,
            MoveKinds.dynamic_delete: MoveKinds.dynamic_add,
        }[self]


# degenerate proposals (empty neighbour list) are tallied under this key
NULL_MOVE = "null"


class PrBlocks(str, Enum):
    pooled = "pooled"
    static = "static"
    dynamic = "dynamic"


class StructureSources(str, Enum):
    random = "random"
    asset = "asset"


class OutputFiles(str, Enum):
    manifest = "manifest.json"
    chain = "chain.json"
    summary = "summary.json"
    edge_posteriors = "edge_posteriors.csv"
    cpdags = "cpdags.csv"
    shd_study = "shd_study.csv"
    shd_summary = "shd_summary.csv"
    auprc = "auprc.csv"
    pr_curve = "pr_curve.csv"
    predictive = "predictive.csv"
    auprc_study = "auprc_study.csv"
    cpdag = "cpdag.txt"

    def __str__(self) -> str:
        return str(self.value)


def dataset_file(replicate: int) -> str:
    return f"dataset_{replicate}.csv"


def truth_file(replicate: int) -> str:
    return f"truth_{replicate}.txt"
