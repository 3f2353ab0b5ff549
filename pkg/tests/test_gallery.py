import os
import runpy
from pathlib import Path

import pytest

GALLERY = Path(__file__).resolve().parent.parent / "gallery"


@pytest.mark.parametrize("script", sorted(p.name for p in GALLERY.glob("*.py")))
def test_gallery_script_runs(script, tmp_path, capsys):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        runpy.run_path(str(GALLERY / script), run_name="__main__")
    finally:
        os.chdir(cwd)
    assert capsys.readouterr().out.strip()
