import os
import sys

# Under ctest, test the extension from the build tree even if an editable
# install is present: drop editable redirect finders before kmodal loads.
_build = os.environ.get("KMODAL_PYTHON_DIR")
if _build:
    sys.meta_path[:] = [
        f for f in sys.meta_path
        if "editable" not in type(f).__module__ and "Redirect" not in type(f).__name__
    ]
    sys.path.insert(0, _build)
