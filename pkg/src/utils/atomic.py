"""Atomic promotion of command outputs: write to a staging directory, move into place on success."""

import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

logger = logging.getLogger(__name__)


@contextmanager
def staged_output(out_dir: Path) -> Iterator[Path]:
    """
    Yield a temporary directory next to ``out_dir``; on clean exit every file in it is
    moved into ``out_dir`` with ``os.replace``. On error the staging directory is removed
    and ``out_dir`` is left untouched.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(dir=out_dir.parent, prefix=f".tmp_{out_dir.name}_"))
    try:
        yield staging
        for src in sorted(staging.rglob("*")):
            if src.is_dir():
                continue
            dest = out_dir / src.relative_to(staging)
            dest.parent.mkdir(parents=True, exist_ok=True)
            with open(src, "rb") as f:
                os.fsync(f.fileno())
            os.replace(src, dest)
            logger.debug(f"[DIR] Promoted {dest}")
        logger.info(f"[DIR] Outputs written to {out_dir}")
    finally:
        if staging.exists():
            shutil.rmtree(staging, ignore_errors=True)
