import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment overrides from a .env file in the working directory
load_dotenv()

# Define the root directory of the project
PROJECT_ROOT = Path.cwd()

# Where simulate/analytic/dispersion write their artifacts
OUTPUT_DIR = Path(os.getenv("TCSL_OUTPUT_DIR", PROJECT_ROOT / "runs"))

# Extra directory searched for scenario files given by bare name
SCENARIO_DIR = Path(os.getenv("TCSL_SCENARIO_DIR", PROJECT_ROOT / "scenarios"))

LOG_LEVEL = os.getenv("TCSL_LOG_LEVEL", "INFO").upper()

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"

# Significant digits for every float written to CSV or manifests
FLOAT_FORMAT = "{:.9g}"

MANIFEST_FILE = "manifest.txt"
