import os

from dotenv import load_dotenv

load_dotenv()

# Directory that relative output paths are resolved against.
OUTPUT_DIR: str = os.getenv("ZZB_OUTPUT_DIR", ".")

# Log level of the command-line driver.
LOG_LEVEL: str = os.getenv("ZZB_LOG_LEVEL", "INFO").upper()

# Maximum number of events a single run records before it is truncated.
MAX_EVENTS: int = int(float(os.getenv("ZZB_MAX_EVENTS", "5e6")))
