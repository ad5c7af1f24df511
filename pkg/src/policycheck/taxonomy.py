"""Hierarchical metadata-type registry.

The label space is a tree of at most three levels, loaded from a plain-text
config file (one dot-path per line) so that the rest of the engine stays
regulation-agnostic. Types are matched case-insensitively and stored in
their canonical spelling.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class TaxonomyError(ValueError):
    """Raised for malformed taxonomy config or unknown type lookups."""


MAX_LEVEL = 3


@dataclass(frozen=True, order=True)
class MetadataType:
    """A node in the metadata-type tree, identified by its path segments."""

    path: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.path) <= MAX_LEVEL:
            raise TaxonomyError(f"path must have 1..{MAX_LEVEL} segments: {self.path!r}")
        if any(not seg.strip() for seg in self.path):
            raise TaxonomyError(f"empty path segment in {self.path!r}")

    @property
    def level(self) -> int:
        return len(self.path)

    @property
    def family(self) -> str:
        """First (level-1) segment of the path."""
        return self.path[0]

    def parent(self) -> "MetadataType | None":
        if self.level == 1:
            return None
        return MetadataType(self.path[:-1])

    def ancestors(self) -> list["MetadataType"]:
        """Proper ancestors, nearest first."""
        return [MetadataType(self.path[:k]) for k in range(self.level - 1, 0, -1)]

    def is_descendant_of(self, other: "MetadataType") -> bool:
        """True for proper descendants and for the type itself."""
        return self.path[: len(other.path)] == other.path

    def __str__(self) -> str:
        return ".".join(self.path)

    @staticmethod
    def parse(text: str) -> "MetadataType":
        segments = tuple(seg.strip() for seg in text.split("."))
        if any(not seg for seg in segments):
            raise TaxonomyError(f"malformed type path: {text!r}")
        return MetadataType(segments)


@dataclass
class TaxonomyRegistry:
    """Immutable-after-load set of metadata types with parent/child links."""

    _nodes: dict[tuple[str, ...], MetadataType] = field(default_factory=dict)
    _children: dict[tuple[str, ...], list[MetadataType]] = field(default_factory=dict)
    _annotations: dict[tuple[str, ...], str] = field(default_factory=dict)

    def _key(self, path: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(seg.lower() for seg in path)

    def add(self, node: MetadataType, annotation: str = "") -> None:
        key = self._key(node.path)
        if key in self._nodes:
            raise TaxonomyError(f"duplicate type path: {node}")
        parent = node.parent()
        if parent is not None and self._key(parent.path) not in self._nodes:
            raise TaxonomyError(f"parent {parent} not defined before {node}")
        self._nodes[key] = node
        self._children.setdefault(key, [])
        if parent is not None:
            self._children[self._key(parent.path)].append(node)
        if annotation:
            self._annotations[key] = annotation

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self):
        return iter(self._nodes.values())

    def __contains__(self, t: MetadataType) -> bool:
        return self._key(t.path) in self._nodes

    def get(self, text: str) -> MetadataType:
        """Resolve a dot-path (case-insensitive) to the canonical node."""
        probe = MetadataType.parse(text)
        node = self._nodes.get(self._key(probe.path))
        if node is None:
            raise TaxonomyError(f"unknown metadata type: {text!r}")
        return node

    def resolve(self, t: MetadataType) -> MetadataType:
        node = self._nodes.get(self._key(t.path))
        if node is None:
            raise TaxonomyError(f"unknown metadata type: {t}")
        return node

    def annotation(self, t: MetadataType) -> str:
        return self._annotations.get(self._key(t.path), "")

    def level_of(self, t: MetadataType) -> int:
        return self.resolve(t).level

    def same_family(self, a: MetadataType, b: MetadataType) -> bool:
        """True iff both types hang under the same level-1 node."""
        return self.resolve(a).family == self.resolve(b).family

    def children(self, t: MetadataType) -> list[MetadataType]:
        self.resolve(t)
        return list(self._children[self._key(t.path)])

    def level1(self) -> list[MetadataType]:
        return [n for n in self._nodes.values() if n.level == 1]

    def at_level(self, level: int) -> list[MetadataType]:
        return [n for n in self._nodes.values() if n.level == level]

    def descendants(self, t: MetadataType) -> list[MetadataType]:
        """All proper descendants of t, in registration order."""
        t = self.resolve(t)
        return [n for n in self._nodes.values() if n is not t and n.is_descendant_of(t)]


def load_taxonomy(config_text: str) -> TaxonomyRegistry:
    """Parse taxonomy config: one dot-path per line, optional TAB annotation.

    Lines starting with '#' and blank lines are ignored. Parents must be
    listed before their children; paths are unique case-insensitively.
    """
    registry = TaxonomyRegistry()
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        path_text, _, annotation = line.partition("\t")
        try:
            node = MetadataType.parse(path_text.strip())
            registry.add(node, annotation.strip())
        except TaxonomyError as exc:
            raise TaxonomyError(f"line {lineno}: {exc}") from exc
    return registry


def dump_taxonomy(registry: TaxonomyRegistry) -> str:
    """Serialize a registry back to config text (round-trips exactly)."""
    lines = []
    for node in registry:
        annotation = registry.annotation(node)
        lines.append(f"{node}\t{annotation}" if annotation else str(node))
    return "\n".join(lines) + "\n"
