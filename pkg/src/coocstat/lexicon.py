"""Relation pair lexicon: loading, filtering, orientation, control sampling.

The lexicon arrives as a neutral TSV export (one related lemma pair per
row) rather than through any specific lexical database API, which keeps
the toolkit agnostic about where the pairs come from.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from coocstat.corpus import CONTENT_POS, VERB, LemmaKey

ANT = "ANT"
SYN = "SYN"
HYP = "HYP"
HOL = "HOL"
UNR = "UNR"

#: Relation labels in canonical reporting order.
RELATIONS = (ANT, HOL, HYP, SYN, UNR)
RELATED = (ANT, SYN, HYP, HOL)

MWE = "MWE"
ABBREV = "ABBREV"
NAMED_ENTITY = "NAMED_ENTITY"
LINKING_VERB = "LINKING_VERB"
AUX_VERB = "AUX_VERB"
LIGHT_VERB = "LIGHT_VERB"

FLAGS = frozenset({MWE, ABBREV, NAMED_ENTITY, LINKING_VERB, AUX_VERB, LIGHT_VERB})
_UNIT_FLAGS = frozenset({MWE, ABBREV, NAMED_ENTITY})
_VERB_CLASS_FLAGS = frozenset({LINKING_VERB, AUX_VERB, LIGHT_VERB})

EXCLUSION_RULES = (
    "mwe_abbrev_ne",
    "low_wn_freq",
    "multi_relation",
    "verb_class",
    "hyp_path",
)


@dataclass(frozen=True)
class LexiconEntry:
    """One related lemma pair as exported from the lexicon.

    `directed_head` names the hypernym/holonym side ("a" or "b") for the
    directed relations; `path_length` is the hierarchy distance and is
    present exactly for HYP entries.
    """

    a: LemmaKey
    b: LemmaKey
    relation: str
    directed_head: str | None = None
    path_length: int | None = None
    wn_freq_a: int = 0
    wn_freq_b: int = 0
    flags_a: frozenset[str] = field(default_factory=frozenset)
    flags_b: frozenset[str] = field(default_factory=frozenset)


class LemmaPair(NamedTuple):
    """A pair oriented so `w` is the corpus-frequent side.

    `head` says whether the hypernym/holonym ended up as "w" or "v";
    None for symmetric or unrelated pairs.
    """

    w: LemmaKey
    v: LemmaKey
    relation: str
    head: str | None = None


class DerivationLink(NamedTuple):
    source: LemmaKey
    derived: LemmaKey


class DerivedPair(NamedTuple):
    original: LemmaPair
    derived: LemmaPair


class LemmaMeta(NamedTuple):
    """Lexicon-side attributes of a single lemma (for control-pair checks)."""

    wn_freq: int
    flags: frozenset[str]


def unordered_key(a: LemmaKey, b: LemmaKey) -> tuple[str, str, str]:
    """Canonical identity of an unordered same-PoS lemma pair."""
    lo, hi = sorted((a.lemma, b.lemma))
    return (a.pos, lo, hi)


def related_pair_set(entries: Iterable[LexiconEntry]) -> set[tuple[str, str, str]]:
    """All unordered pairs that hold any relation, before filtering."""
    return {unordered_key(e.a, e.b) for e in entries}


# ---------------------------------------------------------------------------
# Filtering

class FilterResult(NamedTuple):
    kept: list[LexiconEntry]
    excluded: dict[str, int]


def filter_pairs(entries: Sequence[LexiconEntry]) -> FilterResult:
    """Apply the five exclusion rules, in order, counting removals per rule.

    1. either side flagged as a multi-word expression, abbreviation or
       named entity;
    2. either side with a lexicon frequency of zero or one;
    3. the unordered lemma pair holds more than one relation label
       (all such entries are dropped);
    4. verb pairs with a linking/auxiliary/light verb on either side;
    5. hypernymy pairs with a hierarchy path length above two.
    """
    excluded = {rule: 0 for rule in EXCLUSION_RULES}

    stage1 = []
    for e in entries:
        if (e.flags_a | e.flags_b) & _UNIT_FLAGS:
            excluded["mwe_abbrev_ne"] += 1
        else:
            stage1.append(e)

    stage2 = []
    for e in stage1:
        if e.wn_freq_a <= 1 or e.wn_freq_b <= 1:
            excluded["low_wn_freq"] += 1
        else:
            stage2.append(e)

    relations_of: dict[tuple[str, str, str], set[str]] = {}
    for e in stage2:
        relations_of.setdefault(unordered_key(e.a, e.b), set()).add(e.relation)
    stage3 = []
    for e in stage2:
        if len(relations_of[unordered_key(e.a, e.b)]) > 1:
            excluded["multi_relation"] += 1
        else:
            stage3.append(e)

    stage4 = []
    for e in stage3:
        if e.a.pos == VERB and (e.flags_a | e.flags_b) & _VERB_CLASS_FLAGS:
            excluded["verb_class"] += 1
        else:
            stage4.append(e)

    kept = []
    for e in stage4:
        if e.relation == HYP and e.path_length is not None and e.path_length > 2:
            excluded["hyp_path"] += 1
        else:
            kept.append(e)

    return FilterResult(kept, excluded)


# ---------------------------------------------------------------------------
# Frequency orientation

def _orient(
    a: LemmaKey,
    b: LemmaKey,
    relation: str,
    directed_head: str | None,
    corpus_freq: Mapping[LemmaKey, int],
) -> LemmaPair | None:
    fa = corpus_freq.get(a, 0)
    fb = corpus_freq.get(b, 0)
    if fa == 0 or fb == 0:
        return None
    if fa > fb or (fa == fb and a.lemma < b.lemma):
        w, v = a, b
        head = {"a": "w", "b": "v"}.get(directed_head or "")
    else:
        w, v = b, a
        head = {"a": "v", "b": "w"}.get(directed_head or "")
    return LemmaPair(w, v, relation, head)


class OrientResult(NamedTuple):
    pairs: list[LemmaPair]
    n_dropped: int


def orient_pairs(
    entries: Sequence[LexiconEntry], corpus_freq: Mapping[LemmaKey, int]
) -> OrientResult:
    """Orient every entry so w is the corpus-frequent side.

    Ties go to the lexicographically smaller lemma.  Entries where either
    lemma never occurs in the corpus are dropped and counted.
    """
    pairs = []
    dropped = 0
    for e in entries:
        pair = _orient(e.a, e.b, e.relation, e.directed_head, corpus_freq)
        if pair is None:
            dropped += 1
        else:
            pairs.append(pair)
    return OrientResult(pairs, dropped)


# ---------------------------------------------------------------------------
# Unrelated control pairs

def _passes_meta_checks(
    a: LemmaKey, b: LemmaKey, lemma_meta: Mapping[LemmaKey, LemmaMeta]
) -> bool:
    meta_a = lemma_meta.get(a)
    meta_b = lemma_meta.get(b)
    if meta_a is None or meta_b is None:
        return False
    if (meta_a.flags | meta_b.flags) & _UNIT_FLAGS:
        return False
    if meta_a.wn_freq <= 1 or meta_b.wn_freq <= 1:
        return False
    if a.pos == VERB and (meta_a.flags | meta_b.flags) & _VERB_CLASS_FLAGS:
        return False
    return True


def sample_unrelated(
    corpus_pairs: Iterable[tuple[LemmaKey, LemmaKey]],
    related: set[tuple[str, str, str]],
    n: int,
    seed: int,
    corpus_freq: Mapping[LemmaKey, int],
    lemma_meta: Mapping[LemmaKey, LemmaMeta] | None = None,
) -> list[LemmaPair]:
    """Sample n unrelated same-PoS pairs, uniformly without replacement.

    The candidate universe is the given co-occurring pairs minus anything
    related in the lexicon; when `lemma_meta` is supplied the same
    flag/frequency checks used on related pairs are applied (pairs with
    unknown lemmas are excluded).  Sampling is a partial Fisher-Yates
    shuffle over the canonically sorted universe, driven by a PCG64
    generator, so a fixed seed always returns the same pairs.
    """
    if n <= 0:
        raise ValueError(f"sample size must be positive, got {n}")

    universe_keys = set()
    by_key: dict[tuple[str, str, str], tuple[LemmaKey, LemmaKey]] = {}
    for a, b in corpus_pairs:
        if a.pos != b.pos or a.lemma == b.lemma:
            continue
        key = unordered_key(a, b)
        if key in related:
            continue
        if lemma_meta is not None and not _passes_meta_checks(a, b, lemma_meta):
            continue
        universe_keys.add(key)
        by_key[key] = (a, b)

    universe = sorted(universe_keys)
    k = min(n, len(universe))
    rng = np.random.Generator(np.random.PCG64(seed))
    for i in range(k):
        j = i + int(rng.integers(0, len(universe) - i))
        universe[i], universe[j] = universe[j], universe[i]

    sampled = []
    for key in universe[:k]:
        a, b = by_key[key]
        pair = _orient(a, b, UNR, None, corpus_freq)
        if pair is None:
            raise ValueError(
                f"co-occurring pair {key} has a zero corpus frequency; "
                "frequencies and pair scan disagree"
            )
        sampled.append(pair)
    return sampled


# ---------------------------------------------------------------------------
# Derivation links

def derived_pairs(
    pairs: Sequence[LemmaPair],
    links: Sequence[DerivationLink],
    entries: Sequence[LexiconEntry],
    corpus_freq: Mapping[LemmaKey, int],
) -> list[DerivedPair]:
    """Map each pair to its derivationally related pairs in the lexicon.

    For a pair (w, v), every (w_d, v_d) with w_d derived from w and v_d
    derived from v counts when that pair holds a relation among the given
    entries and both derived lemmas occur in the corpus.  The two
    relations may differ.
    """
    links_from: dict[LemmaKey, list[LemmaKey]] = {}
    for link in links:
        links_from.setdefault(link.source, []).append(link.derived)

    entry_by_key: dict[tuple[str, str, str], LexiconEntry] = {
        unordered_key(e.a, e.b): e for e in entries
    }

    out = []
    seen = set()
    for pair in pairs:
        for wd in links_from.get(pair.w, ()):
            for vd in links_from.get(pair.v, ()):
                if wd.pos != vd.pos:
                    continue
                entry = entry_by_key.get(unordered_key(wd, vd))
                if entry is None:
                    continue
                derived = _orient(
                    entry.a, entry.b, entry.relation, entry.directed_head, corpus_freq
                )
                if derived is None:
                    continue
                item = DerivedPair(pair, derived)
                if item not in seen:
                    seen.add(item)
                    out.append(item)
    return out


# ---------------------------------------------------------------------------
# File formats

def _parse_flags(text: str, path: str, line_no: int) -> frozenset[str]:
    if not text:
        return frozenset()
    flags = frozenset(text.split(","))
    bad = flags - FLAGS
    if bad:
        raise ValueError(f"{path} line {line_no}: unknown flags {sorted(bad)}")
    return flags


def load_lexicon(path: str) -> list[LexiconEntry]:
    """Read the pair-file export: one related lemma pair per TSV row.

    Columns: lemma_a pos lemma_b relation directed_head path_length
    wn_freq_a wn_freq_b flags_a flags_b.  Empty fields mean "absent";
    flags are comma-separated.
    """
    entries = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            f = line.split("\t")
            if len(f) != 10:
                raise ValueError(
                    f"{path} line {line_no}: expected 10 fields, got {len(f)}"
                )
            lemma_a, pos, lemma_b, relation, head, plen, freq_a, freq_b = f[:8]
            pos = pos.upper()
            relation = relation.upper()
            if pos not in CONTENT_POS:
                raise ValueError(f"{path} line {line_no}: bad pos {pos!r}")
            if relation not in RELATED:
                raise ValueError(f"{path} line {line_no}: bad relation {relation!r}")
            lemma_a = lemma_a.casefold()
            lemma_b = lemma_b.casefold()
            if lemma_a == lemma_b:
                raise ValueError(f"{path} line {line_no}: identical lemmas")
            if head not in ("", "a", "b"):
                raise ValueError(f"{path} line {line_no}: bad directed_head {head!r}")
            if head and relation not in (HYP, HOL):
                raise ValueError(
                    f"{path} line {line_no}: directed_head given for {relation}"
                )
            if relation == HYP:
                if not plen:
                    raise ValueError(f"{path} line {line_no}: HYP needs path_length")
                path_length = int(plen)
            else:
                if plen:
                    raise ValueError(
                        f"{path} line {line_no}: path_length given for {relation}"
                    )
                path_length = None
            entries.append(
                LexiconEntry(
                    a=LemmaKey(lemma_a, pos),
                    b=LemmaKey(lemma_b, pos),
                    relation=relation,
                    directed_head=head or None,
                    path_length=path_length,
                    wn_freq_a=int(freq_a) if freq_a else 0,
                    wn_freq_b=int(freq_b) if freq_b else 0,
                    flags_a=_parse_flags(f[8], path, line_no),
                    flags_b=_parse_flags(f[9], path, line_no),
                )
            )
    return entries


def load_derivations(path: str) -> list[DerivationLink]:
    """Read derivation links: lemma pos derived_lemma derived_pos."""
    links = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            f = line.split("\t")
            if len(f) != 4:
                raise ValueError(
                    f"{path} line {line_no}: expected 4 fields, got {len(f)}"
                )
            source = LemmaKey(f[0].casefold(), f[1].upper())
            derived = LemmaKey(f[2].casefold(), f[3].upper())
            if source.pos not in CONTENT_POS or derived.pos not in CONTENT_POS:
                raise ValueError(f"{path} line {line_no}: bad pos")
            if source == derived:
                raise ValueError(f"{path} line {line_no}: self-link")
            links.append(DerivationLink(source, derived))
    return links


def load_lemma_attrs(path: str) -> dict[LemmaKey, LemmaMeta]:
    """Read per-lemma attributes: lemma pos wn_freq flags."""
    meta = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            f = line.split("\t")
            if len(f) != 4:
                raise ValueError(
                    f"{path} line {line_no}: expected 4 fields, got {len(f)}"
                )
            key = LemmaKey(f[0].casefold(), f[1].upper())
            meta[key] = LemmaMeta(int(f[2]) if f[2] else 0, _parse_flags(f[3], path, line_no))
    return meta


def lemma_meta_from_entries(entries: Iterable[LexiconEntry]) -> dict[LemmaKey, LemmaMeta]:
    """Fallback per-lemma attributes aggregated from lexicon rows."""
    meta: dict[LemmaKey, LemmaMeta] = {}
    for e in entries:
        for key, freq, flags in ((e.a, e.wn_freq_a, e.flags_a), (e.b, e.wn_freq_b, e.flags_b)):
            old = meta.get(key)
            if old is None:
                meta[key] = LemmaMeta(freq, flags)
            else:
                meta[key] = LemmaMeta(max(old.wn_freq, freq), old.flags | flags)
    return meta


_VERB_CLASS_NAMES = {
    "linking": LINKING_VERB,
    "aux": AUX_VERB,
    "light": LIGHT_VERB,
}


def load_verb_classes(path: str) -> dict[str, frozenset[str]]:
    """Read the verb word list: lemma class, class in {linking, aux, light}."""
    classes: dict[str, set[str]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            f = line.split("\t")
            if len(f) != 2 or f[1] not in _VERB_CLASS_NAMES:
                raise ValueError(f"{path} line {line_no}: expected 'lemma<TAB>class'")
            classes.setdefault(f[0].casefold(), set()).add(_VERB_CLASS_NAMES[f[1]])
    return {lemma: frozenset(flags) for lemma, flags in classes.items()}


def apply_verb_class_flags(
    entries: Sequence[LexiconEntry], classes: Mapping[str, frozenset[str]]
) -> list[LexiconEntry]:
    """Add linking/aux/light flags to verb entries from a word list."""
    out = []
    for e in entries:
        if e.a.pos == VERB:
            extra_a = classes.get(e.a.lemma, frozenset())
            extra_b = classes.get(e.b.lemma, frozenset())
            if extra_a or extra_b:
                e = replace(e, flags_a=e.flags_a | extra_a, flags_b=e.flags_b | extra_b)
        out.append(e)
    return out


PAIRS_HEADER = "lemma_w\tlemma_v\tpos\trelation\thead"


def write_pairs(pairs: Iterable[LemmaPair], path: str) -> None:
    with open(path, "w", encoding="utf-8") as out:
        out.write(PAIRS_HEADER + "\n")
        for p in pairs:
            out.write(
                f"{p.w.lemma}\t{p.v.lemma}\t{p.w.pos}\t{p.relation}\t{p.head or ''}\n"
            )


def read_pairs(path: str) -> list[LemmaPair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if header != PAIRS_HEADER:
            raise ValueError(f"{path}: not a pairs file")
        for line_no, line in enumerate(handle, start=2):
            f = line.rstrip("\n").split("\t")
            if len(f) != 5:
                raise ValueError(f"{path} line {line_no}: expected 5 fields")
            pairs.append(
                LemmaPair(
                    w=LemmaKey(f[0], f[2]),
                    v=LemmaKey(f[1], f[2]),
                    relation=f[3],
                    head=f[4] or None,
                )
            )
    return pairs


DERIVED_HEADER = (
    "orig_w\torig_v\torig_pos\torig_rel\torig_head\t"
    "derv_w\tderv_v\tderv_pos\tderv_rel\tderv_head"
)


def write_derived_map(derived: Iterable[DerivedPair], path: str) -> None:
    with open(path, "w", encoding="utf-8") as out:
        out.write(DERIVED_HEADER + "\n")
        for d in derived:
            o, v = d.original, d.derived
            out.write(
                f"{o.w.lemma}\t{o.v.lemma}\t{o.w.pos}\t{o.relation}\t{o.head or ''}\t"
                f"{v.w.lemma}\t{v.v.lemma}\t{v.w.pos}\t{v.relation}\t{v.head or ''}\n"
            )


def read_derived_map(path: str) -> list[DerivedPair]:
    derived = []
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if header != DERIVED_HEADER:
            raise ValueError(f"{path}: not a derived-pairs file")
        for line_no, line in enumerate(handle, start=2):
            f = line.rstrip("\n").split("\t")
            if len(f) != 10:
                raise ValueError(f"{path} line {line_no}: expected 10 fields")
            derived.append(
                DerivedPair(
                    original=LemmaPair(
                        LemmaKey(f[0], f[2]), LemmaKey(f[1], f[2]), f[3], f[4] or None
                    ),
                    derived=LemmaPair(
                        LemmaKey(f[5], f[7]), LemmaKey(f[6], f[7]), f[8], f[9] or None
                    ),
                )
            )
    return derived
