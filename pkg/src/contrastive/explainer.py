"""Turn (x, x_tilde) into a predicate, score it, and render it as contrastive text."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .exceptions import ExplanationError

EXACT, MAGNITUDE, RELATIVE = "exact", "magnitude", "relative"
DEGREES = (EXACT, MAGNITUDE, RELATIVE)

# mood decides the phrasing of each change:
#   had    -> describes x_tilde relative to x ("bare nuclei been 9 point higher")
#   because-> describes x relative to x_tilde ("bare nuclei is 9 point lower")
#   count  -> counted nouns ("9 more bare nucleus")
DEFAULT_TEMPLATES = {
    "because": {"text": "{subject} is classified as {X} RATHER THAN {Y} because {changes}",
                "mood": "because"},
    "had": {"text": "had {changes}, {subject} would have been classified as {Y} RATHER THAN {X}",
            "mood": "had"},
    "if_there_were": {"text": "if there were {changes}, {subject} would be classified as "
                              "{Y} RATHER THAN {X}",
                      "mood": "count"},
}

RATIO_WORDS = {2.0: "twice", 3.0: "three times", 0.5: "half"}
RATIO_TOL = 0.1


@dataclass(frozen=True)
class Change:
    index: int
    name: str
    old: float
    new: float

    @property
    def delta(self):
        return self.new - self.old

    @property
    def direction(self):
        return "up" if self.new > self.old else "down"


@dataclass
class Predicate:
    changes: list
    label_X: str
    label_Y: str

    def __len__(self):
        return len(self.changes)


@dataclass
class ExplanationText:
    template: str
    degrees: list
    text: str

    def __str__(self):
        return self.text


def extract_predicate(x, x_tilde, names, label_X, label_Y, order=None):
    """Changes for every feature where ``x_tilde`` differs from ``x``.

    Changes follow ``order`` (e.g. the ranked perturbation set); differing
    features missing from ``order`` come after, by index.
    """
    if len(x) != len(x_tilde) or len(x) != len(names):
        raise ExplanationError("x, x_tilde and names must have equal lengths")
    diff = [j for j in range(len(x)) if x_tilde[j] != x[j]]
    order = list(order or [])
    rank = {j: i for i, j in enumerate(order)}
    diff.sort(key=lambda j: (rank.get(j, len(order)), j))
    changes = [Change(j, names[j], float(x[j]), float(x_tilde[j])) for j in diff]
    return Predicate(changes, label_X, label_Y)


def influence_score(predicate: Predicate, flipped: bool, lam=1.0):
    """1(Y != X) / |P| ** lam."""
    if not flipped:
        return 0.0
    if len(predicate) == 0:
        raise ExplanationError("a flipped prediction needs a non-empty predicate")
    return 1.0 / len(predicate) ** lam


def fmt_number(v):
    s = f"{abs(v):.3f}".rstrip("0").rstrip(".")
    return s or "0"


def _ratio_word(num, den):
    if den == 0 or num == 0 or (num > 0) != (den > 0):
        return None
    r = num / den
    for target, word in RATIO_WORDS.items():
        if abs(r - target) <= RATIO_TOL * target:
            return word
    return None


def _plain(feature, plain_names):
    entry = (plain_names or {}).get(feature, feature)
    if isinstance(entry, dict):
        return entry.get("name", feature), entry.get("unit", "point")
    return entry, "point"


def phrase_change(change: Change, mood, degree, plain_names=None):
    name, unit = _plain(change.name, plain_names)
    up = change.new > change.old
    if mood == "because":
        up = not up
        num, den = change.old, change.new
    else:
        num, den = change.new, change.old
    d = fmt_number(change.delta)

    if degree == MAGNITUDE:
        word = _ratio_word(num, den)
        if word is None:
            degree = EXACT
        elif mood == "count":
            return f"{word} as many {name}"
        else:
            verb = "been" if mood == "had" else "is"
            return f"{name} {verb} {word} as high"

    if mood == "count":
        more = "more" if up else "fewer"
        return f"{d} {more} {name}" if degree == EXACT else f"{more} {name}"
    verb = "been" if mood == "had" else "is"
    comp = "higher" if up else "lower"
    if degree == EXACT:
        return f"{name} {verb} {d} {unit} {comp}"
    return f"{name} {verb} {comp}"


def _join(parts):
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + " and " + parts[-1]


def load_templates(path):
    """Template file: JSON object mapping ids to either a text or {"text", "mood"}."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for tid, entry in doc.items():
        if isinstance(entry, str):
            entry = {"text": entry, "mood": "had"}
        if "{changes}" not in entry["text"]:
            raise ExplanationError(f"template {tid!r} lacks a {{changes}} placeholder")
        out[tid] = {"text": entry["text"], "mood": entry.get("mood", "had")}
    return out


def render_text(predicate: Predicate, template=None, degrees=EXACT, plain_names=None,
                subject="the sample", templates=None, seed=0):
    """Render a predicate through a template.

    ``template`` defaults to a seeded choice among the available ids.
    ``degrees`` is one obscurity degree or a list with one per change.
    """
    if len(predicate) == 0:
        raise ExplanationError("nothing to explain: predicate is empty")
    templates = templates or DEFAULT_TEMPLATES
    if template is None:
        template = random.Random(seed).choice(sorted(templates))
    if template not in templates:
        raise ExplanationError(f"unknown template {template!r}")
    if isinstance(degrees, str):
        degrees = [degrees] * len(predicate)
    degrees = list(degrees)
    if len(degrees) != len(predicate) or any(d not in DEGREES for d in degrees):
        raise ExplanationError(f"need one degree from {DEGREES} per change")
    entry = templates[template]
    parts = [phrase_change(c, entry["mood"], deg, plain_names)
             for c, deg in zip(predicate.changes, degrees)]
    text = entry["text"].format(changes=_join(parts), X=predicate.label_X,
                                Y=predicate.label_Y, subject=subject)
    return ExplanationText(template, degrees, text)
