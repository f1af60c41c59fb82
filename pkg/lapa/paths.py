"""Local project path constants."""
from pathlib import Path

PACKAGE_DIR = Path(__file__).parent
BUNDLED_CATALOG = PACKAGE_DIR / "data" / "attack_persistence.json"

PROJECT_ROOT = Path(__file__).parents[1]
DOTENV = PROJECT_ROOT / ".env"
