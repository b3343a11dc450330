# scenarios/artifact_writer.py - Atomic CSV and manifest output
import json
import logging
import os
import tempfile
from typing import Any, Dict, List

import pandas as pd

from fields.errors import ArtifactError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


class ArtifactWriter:
    """Writes run artifacts into one directory and remembers what it wrote"""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written: List[str] = []
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as e:
            raise ArtifactError(f"cannot create output directory {out_dir}: {e}") from e

    def path_for(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _atomic_write(self, name: str, write):
        """Write through a temp file in the target directory, then rename"""
        target = self.path_for(name)
        fd, tmp_path = tempfile.mkstemp(prefix=f'.{name}.', suffix='.tmp', dir=self.out_dir)
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
                write(handle)
            os.replace(tmp_path, target)
        except OSError as e:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise ArtifactError(f"failed to write {target}: {e}") from e
        if name not in self.written:
            self.written.append(name)
        logger.info(f"Wrote {target}")
        return target

    def write_frame(self, name: str, frame: pd.DataFrame) -> str:
        return self._atomic_write(name, lambda handle: frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT))

    def write_json(self, name: str, payload: Dict[str, Any]) -> str:
        def dump(handle):
            json.dump(payload, handle, indent=2, sort_keys=True, default=str)
            handle.write('\n')
        return self._atomic_write(name, dump)

    def get_written(self) -> List[str]:
        return list(self.written)
