import pathlib
import sys

# allow running the suite from a checkout without installing the package
_src = pathlib.Path(__file__).resolve().parents[1] / "src"
if str(_src) not in sys.path:
    sys.path.insert(0, str(_src))
