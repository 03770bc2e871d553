"""
Constants for the d2d-topology simulator.
"""

# Numerical tolerances
STOCHASTIC_TOL = 1e-9  # per row/column sum and symmetry
DECOMPOSITION_TOL = 1e-8
DEGREE_TOL = 1e-6

# Topology learning defaults
DEFAULT_LAMBDA = 0.001
DEFAULT_EXCHANGE_PERIOD = 3
DEFAULT_FW_GRID_POINTS = 64
DEFAULT_FW_TOL = 1e-9
MAX_REGULAR_GRAPH_RETRIES = 1000

# Training defaults
DEFAULT_LEARNING_RATE = 0.1
DEFAULT_BATCH_SIZE = 128
DEFAULT_MC_SAMPLES = 8

# Field-scale channel preset (linear units are derived in channel.py)
FIELD_TX_POWER_DBM = 10.0
FIELD_NOISE_POWER_DBM = -169.0
FIELD_DECODE_THRESHOLD_DB = 0.0
FIELD_BANDWIDTH_HZ = 5e6
FIELD_PACKAGE_BITS = 1.2e6 * 8
FIELD_REGION_SIDE_M = 1000.0

# Desk-scale channel preset: off-diagonal success in roughly [0.5, 0.99]
TOY_TX_POWER_W = 1.0
TOY_NOISE_POWER_W = 3.5e-5
TOY_DECODE_THRESHOLD = 1.0
TOY_BANDWIDTH_HZ = 1e6
TOY_PACKAGE_BITS = 1e6
TOY_REGION_SIDE_M = 100.0

# Methods
METHOD_TOLRDUL = "tolrdul"
METHOD_STL_FW = "stl_fw"
METHOD_RANDOM_REGULAR = "random_regular"
METHOD_FULLY_CONNECTED = "fully_connected"
METHODS = (METHOD_TOLRDUL, METHOD_STL_FW, METHOD_RANDOM_REGULAR, METHOD_FULLY_CONNECTED)
METHOD_LABELS = {
    METHOD_TOLRDUL: "tolrdul",
    METHOD_STL_FW: "stl_fw_like",
    METHOD_RANDOM_REGULAR: "random_regular",
    METHOD_FULLY_CONNECTED: "fully_connected",
}

# Output
METRICS_CSV_HEADER = ("round", "train_loss", "test_acc", "latency_s", "h_bar_mc", "g_value")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
