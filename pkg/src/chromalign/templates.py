"""Deterministic generation of controlled-context sentences for embedding
extraction."""

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

from chromalign.errors import ConfigurationError

COLOR_SLOT = "<col>"
OBJECT_SLOT = "<obj>"


@dataclass(frozen=True)
class TemplateFrame:
    name: str
    pattern: str

    def __post_init__(self):
        for slot in (COLOR_SLOT, OBJECT_SLOT):
            if self.pattern.count(slot) != 1:
                raise ConfigurationError(
                    f"frame {self.name!r} must contain {slot} exactly once: {self.pattern!r}")


DEFAULT_FRAMES = (
    TemplateFrame("copula", f"the {OBJECT_SLOT} is {COLOR_SLOT}"),
    TemplateFrame("possession", f"i have a {COLOR_SLOT} {OBJECT_SLOT}"),
    TemplateFrame("spatial", f"the {COLOR_SLOT} {OBJECT_SLOT} is there"),
)

# Placeholder list of 18 nouns plausible in many colors, spread over everyday
# categories (appliances, clothing, vehicles, furniture, toys, ...). The
# original selection is unpublished; override via configuration.
DEFAULT_OBJECTS = (
    "fan", "skirt", "car", "cup", "balloon", "towel", "chair", "pencil",
    "kite", "vase", "bicycle", "umbrella", "sofa", "plate", "jacket",
    "lamp", "scarf", "wagon",
)


class ContextSentence(NamedTuple):
    term: str
    frame: str
    object: str
    sentence: str


def generate_controlled_contexts(
    terms: Sequence[str],
    objects: Sequence[str] = DEFAULT_OBJECTS,
    frames: Sequence[TemplateFrame] = DEFAULT_FRAMES,
) -> list[ContextSentence]:
    """Full cross product in deterministic frame-major, then object, then term
    order; slots substituted verbatim after lowercasing."""
    if not terms or not objects or not frames:
        raise ConfigurationError("terms, objects, and frames must be non-empty")
    out = []
    for frame in frames:
        for obj in objects:
            for term in terms:
                term_lc = term.lower()
                obj_lc = obj.lower()
                sentence = frame.pattern.replace(COLOR_SLOT, term_lc).replace(OBJECT_SLOT, obj_lc)
                out.append(ContextSentence(term_lc, frame.name, obj_lc, sentence))
    return out


def write_contexts(contexts: Sequence[ContextSentence], sentences_path: str | Path,
                   index_path: str | Path) -> None:
    """One sentence per line, plus a TSV index term/frame/object/line_no."""
    with open(sentences_path, "w", encoding="utf-8") as fh:
        for ctx in contexts:
            fh.write(ctx.sentence + "\n")
    with open(index_path, "w", encoding="utf-8") as fh:
        fh.write("term\tframe\tobject\tline_no\n")
        for line_no, ctx in enumerate(contexts, start=1):
            fh.write(f"{ctx.term}\t{ctx.frame}\t{ctx.object}\t{line_no}\n")
