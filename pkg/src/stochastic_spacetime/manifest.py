"""Run manifests: the reproducibility envelope written next to every output."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    experiment_name: str
    seed: int
    parameters: list[tuple[str, object]] = field(default_factory=list)
    toolkit_version: str = __version__
    output_files: list[tuple[str, str]] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add_output(self, path, root=None) -> None:
        path = Path(path)
        name = str(path.relative_to(root)) if root is not None else str(path)
        self.output_files.append((name, sha256_file(path)))

    def to_json(self) -> str:
        doc = {
            "experiment_name": self.experiment_name,
            "seed": self.seed,
            "parameters": [[k, v] for k, v in self.parameters],
            "toolkit_version": self.toolkit_version,
            "output_files": [[p, h] for p, h in self.output_files],
            "summary": self.summary,
        }
        return json.dumps(doc, indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        doc = json.loads(text)
        return cls(
            experiment_name=doc["experiment_name"],
            seed=doc["seed"],
            parameters=[(k, v) for k, v in doc["parameters"]],
            toolkit_version=doc["toolkit_version"],
            output_files=[(p, h) for p, h in doc["output_files"]],
            summary=doc.get("summary", {}),
        )

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls.from_json(Path(path).read_text())
