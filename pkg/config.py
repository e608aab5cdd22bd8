"""
Configuration file for the hybrid wind-speed forecasting toolkit
Default parameters for every stage of the pipeline
"""

# Dataset Split
TEST_LEN = 400  # Published preset: 400 test samples per site
RESIDUAL_FRACTION = 0.25  # Trailing share of the training set used to fit residuals
EVALUATION_TARGET = "raw"  # "raw" observations or "denoised" SSA series

# Synthetic Data (stand-in for the unavailable wind-farm datasets)
SYNTH_LENGTH = 2400  # 2000 train + 400 test
SYNTH_SEEDS = (0,)  # One synthetic dataset per seed
SYNTH_MEAN = 7.5  # m/s
SYNTH_DIURNAL_AMPLITUDE = 2.0  # m/s, 24-sample sine
SYNTH_AR_COEFFICIENT = 0.8  # AR(1) noise persistence
SYNTH_NOISE_STD = 0.9  # m/s, AR(1) innovation std
SYNTH_TREND = 0.5  # m/s drift over the full series
SYNTH_FLOOR = 0.05  # m/s, keeps MAPE well defined

# Metrics
MAPE_FLOOR = 1e-8  # |y| at or below this raises ZeroTarget

# SSA Parameters
SSA_ENABLED = True  # Denoise the training series before fitting
SSA_WINDOW_LEN = 20  # Published preset: SSA embedding dimension L
SSA_KEEP_COMPONENTS = 10  # Published preset: SSA reconstruction dimension p
SSA_EIGEN_CUTOFF = 1e-12  # Eigenvalues below cutoff * lambda_max are reported as 0

# Phase Space Reconstruction
PSR_DELAY = 1  # Published preset: time delay
PSR_DIMENSION = 60  # Published preset: reconstruction dimension
PSR_AUTO = False  # Fixed preset unless auto-selection is requested
PSR_TAU_MAX = 24  # Delays scanned by the AMI profile
PSR_D_MAX = 10  # Dimensions scanned by the Cao profile
PSR_TOLERANCE = 0.05  # |dE - 1| tolerance for "no longer changes"
AMI_ESTIMATOR = "copula"  # Rank-Gaussian MI; "histogram" uses quantile bins
AMI_ESTIMATORS = ("copula", "histogram")
AMI_SNAP_DECIMALS = 9  # Values rescaled to [0, 1] and rounded before ranking or binning
AMI_MIN_BINS = 8  # Quantile bins = ceil(N^(1/3)) clamped to [8, 64]
AMI_MAX_BINS = 64
NEIGHBOR_FLOOR = 1e-12  # Zero neighbour distances floored at this * series range

# VMD Parameters
VMD_MODES = 10  # Published preset: number of modes to be recovered
VMD_ALPHA = 5000.0  # Published preset: moderate bandwidth constraint
VMD_TAU = 0.0  # Published preset: noise-tolerance (dual ascent step)
VMD_DC = False  # No mode pinned at zero frequency
VMD_INIT = "zeros"  # Published preset: init 0, all center frequencies start at 0
VMD_TOL = 1e-7  # Published preset: tolerance of convergence criterion
VMD_MAX_ITER = 500  # Published preset: maximum number of iterations
VMD_SEED = 0  # Only used by init="random"
VMD_INIT_CHOICES = ("zeros", "uniform", "random")

# Neural Network Parameters
MODEL_KINDS = ("MLP", "RNN", "GRU", "AtGRU")
MODEL_DISPLAY_NAMES = {"MLP": "BPNN", "RNN": "RNN", "GRU": "GRU", "AtGRU": "AtGRU"}
HIDDEN_UNITS = 64  # Published preset: layers 64 for RNN / GRU / AtGRU
MLP_LAYERS = (60, 40, 20)  # Published preset: layers 60/40/20/1 (the trailing 1 is the output)
EPOCHS = 150
BATCH_SIZE = 64
LEARNING_RATE = 1e-3  # Adam default
OPTIMIZER = "Adam"
OPTIMIZERS = ("Adam", "SGD")
LOSS = "MSE"
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
PARAMS_FORMAT_VERSION = 1  # Version tag written into serialized weights

# Gradient Verification
GRADCHECK_STEP = 1e-5  # Central difference step on float64
GRADCHECK_TOLERANCE = 1e-4  # Max relative error accepted
GRADCHECK_FLOOR = 1e-5  # Denominator floor for near-zero gradient entries
GRADCHECK_SEEDS = 20
GRADCHECK_HIDDEN = 4
GRADCHECK_WINDOW = 5

# Error Correction
PREDICTOR_KIND = "AtGRU"
CORRECTOR_KIND = "GRU"
DECOMPOSER = "VMD"
DECOMPOSER_CHOICES = ("VMD", "SSA", "None")
CORRECTOR_DELAY = 1
CORRECTOR_DIMENSION = 20  # Residual modes are band-limited, shorter window than the predictor
MIN_TRAINING_WINDOWS = 50

# Experiment Settings
HORIZONS = (1, 2, 3)  # One-step / two-step / three-step
PIPELINE_SEED = 42
JOBS = 1
OUTPUT_DIR = "results"
LOG_DIR = "logs"
FORECAST_STRATEGY = "recursive"  # Iterated one-step forecasting, one model per arm

# Exit Codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

# Provenance tags for run-config defaults
PUBLISHED = "published preset"
DERIVED = "toolkit default"
