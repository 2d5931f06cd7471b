from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from typing import Optional, TextIO

from .config import AppConfig
from .exports import write_text_atomic


@dataclass
class CliRuntime:
    config: AppConfig
    stdout: TextIO = field(default_factory=lambda: sys.stdout)
    stderr: TextIO = field(default_factory=lambda: sys.stderr)
    written: Optional[str] = None

    def resolve_path(self, path: str) -> str:
        expanded = os.path.expanduser(path)
        if os.path.isabs(expanded):
            return expanded
        return os.path.join(self.config.output_dir, expanded)

    def emit(self, text: str, out: Optional[str]) -> None:
        """Write ``text`` to ``out`` (relative to the output dir) or to stdout."""
        if not out:
            self.stdout.write(text)
            return
        path = self.resolve_path(out)
        write_text_atomic(path, text)
        self.written = path

    def report(self, message: str) -> None:
        print(message, file=self.stderr)
