import logging
import os

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("ORDEST_LOG_LEVEL", "INFO").upper()

QUADRATURE_TOL = float(os.getenv("ORDEST_QUADRATURE_TOL", "1e-10"))
ROOT_TOL = float(os.getenv("ORDEST_ROOT_TOL", "1e-9"))

DEFAULT_SEED = int(os.getenv("ORDEST_SEED", "20240601"))
DEFAULT_SAMPLES = int(os.getenv("ORDEST_SAMPLES", "10000"))
DEFAULT_WORKERS = int(os.getenv("ORDEST_WORKERS", "1"))

# psi tabulation grid, in units of the scale of D = X2 - X1
PSI_GRID_HALF_WIDTH = 8.0
PSI_GRID_POINTS = 321

# root brackets for psi(t), in units of the marginal scale
ROOT_BRACKET_HALF_WIDTH = 6.0
ROOT_MAX_EXPANSIONS = 20

# half-width of every finite integration window, in marginal scales
WINDOW_SCALES = 12.0

# exact-risk outer integral is truncated to lambda +- this many scales of D
RISK_TRUNCATION_SCALES = 10.0
RISK_TOL = 1e-8

DEFAULT_SIGMA2 = 0.418
DEFAULT_RHO = 0.626

# dental study, 5 girls and 8 boys: published means and estimates
DENTAL_REFERENCE = {
    "means": (23.077, 22.654),
    "mle": (22.86, 22.86),
    "bz_squared": (22.77, 22.96),
    "bz_absolute": (22.71, 23.03),
}
REFERENCE_TOLERANCE = 0.1

logging.basicConfig(
    level=LOG_LEVEL,
    format="%(asctime)s %(levelname)-8s %(pathname)s:%(lineno)d - %(message)s",
    datefmt="%H:%M:%S %d.%m.%Y",
)
