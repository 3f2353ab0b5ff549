"""Graphviz DOT rendering of binary structures."""

from __future__ import annotations

from pathlib import Path

from .structures import RelStructure

PALETTE = ("black", "red", "blue", "darkgreen", "orange", "purple", "brown", "cyan4")


def to_dot(structure: RelStructure, name: str = "S") -> str:
    """DOT digraph: nodes numbered from 1, one color per relation, and relations
    equal to their own converse drawn once per pair as undirected dashed edges."""
    for rel, (arity, _) in structure.relations.items():
        if arity != 2:
            raise ValueError(f"relation {rel!r} is not binary")
    lines = [f"digraph {name} {{", "  node [shape=circle];"]
    lines += [f"  {x + 1};" for x in range(structure.domain_size)]
    for i, (rel, (_, ts)) in enumerate(structure.relations.items()):
        color = PALETTE[i % len(PALETTE)]
        pairs = set(ts)
        symmetric = all((b, a) in pairs for a, b in pairs)
        if symmetric:
            for a, b in sorted(pairs):
                if a <= b:
                    lines.append(f'  {a + 1} -> {b + 1} [label="{rel}", color={color}, '
                                 f"style=dashed, dir=none];")
        else:
            for a, b in sorted(pairs):
                lines.append(f'  {a + 1} -> {b + 1} [label="{rel}", color={color}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(structure: RelStructure, path, name: str = "S") -> Path:
    path = Path(path)
    path.write_text(to_dot(structure, name))
    return path
