from dotenv import load_dotenv
import logging
import os


def read_fixture_file(file_path):
    try:
        with open(file_path, 'r', encoding='utf-8') as file:
            return file.read()
    except UnicodeDecodeError:
        logging.getLogger(__name__).error("Error reading %s. Please check the file encoding.", file_path)
        return ""


def _flag(name, default="0"):
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


load_dotenv()

#COMPLEX
MAX_CROSSINGS = int(os.getenv("KJCLASS_MAX_CROSSINGS", "20"))
DEBUG_CHECKS = _flag("KJCLASS_DEBUG_CHECKS")
# debug mode checks det(U), det(V) = ±1 only up to this size
SMALL_DET_CHECK = 8
MAX_MATRIX_DIM = int(os.getenv("KJCLASS_MAX_MATRIX_DIM", "60000"))

#SUITES
ALLOW_LARGE = _flag("KJCLASS_ALLOW_LARGE")
DEFAULT_SEED = int(os.getenv("KJCLASS_SEED", "0"))
FIXTURES_DIR = os.getenv("KJCLASS_FIXTURES_DIR", os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures"))

#LOGGING
LOG_LEVEL = os.getenv("KJCLASS_LOG_LEVEL", "WARNING").upper()
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_configured = False


def get_logger(name):
    global _configured
    if not _configured:
        logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
        _configured = True
    return logging.getLogger(name)


def set_log_level(level):
    logging.getLogger().setLevel(level)


def fixture_path(*parts):
    return os.path.join(FIXTURES_DIR, *parts)
