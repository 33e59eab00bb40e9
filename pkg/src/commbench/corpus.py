"""Corpus manifests: named edge-list files with domain labels."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .graph import Graph, load_edge_list

__all__ = ["DOMAINS", "CorpusEntry", "CorpusManifest", "load_manifest",
           "mini_corpus_path"]

DOMAINS = ("social", "biological", "economic", "technological",
           "transportation", "information", "synthetic")


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    path: Path
    domain: str

    def load(self, largest_component: bool = True) -> Graph:
        return load_edge_list(self.path, simplify=True,
                              largest_component=largest_component)


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[CorpusEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def domains(self) -> dict[str, str]:
        return {e.name: e.domain for e in self.entries}

    def get(self, name: str) -> CorpusEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


def load_manifest(path: str | Path) -> CorpusManifest:
    """Read a ``name,path,domain`` CSV; relative paths resolve against it."""
    path = Path(path)
    base = path.parent
    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"name", "path", "domain"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"manifest must have columns {sorted(required)}, "
                             f"got {reader.fieldnames}")
        for row in reader:
            name = row["name"].strip()
            domain = row["domain"].strip().lower()
            if name in seen:
                raise ValueError(f"duplicate network name {name!r} in manifest")
            seen.add(name)
            if domain not in DOMAINS:
                raise ValueError(f"unknown domain {domain!r} for {name!r}; "
                                 f"expected one of {', '.join(DOMAINS)}")
            epath = Path(row["path"].strip())
            if not epath.is_absolute():
                epath = (base / epath).resolve()
            if not epath.is_file():
                raise ValueError(f"edge list for {name!r} not readable: {epath}")
            entries.append(CorpusEntry(name=name, path=epath, domain=domain))
    if not entries:
        raise ValueError(f"manifest {path} lists no networks")
    return CorpusManifest(entries=tuple(entries))


def mini_corpus_path() -> Path:
    """Location of the bundled ~20-network mini corpus manifest."""
    return Path(resources.files("commbench") / "data" / "mini" / "manifest.csv")
