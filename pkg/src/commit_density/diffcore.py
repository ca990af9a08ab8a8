"""Line lexing and per-file gross/net line accounting.

Changed lines are classified as code, comment or whitespace using the comment
syntax of the file's language. Only code lines count toward net size.
"""

from __future__ import annotations

import enum
import json
import os
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path


class InvalidInputError(ValueError):
    pass


class LineClass(enum.Enum):
    CODE = "code"
    COMMENT = "comment"
    WHITESPACE = "whitespace"


@dataclass(frozen=True)
class LanguageProfile:
    """Comment syntax for a family of file types."""

    name: str
    file_extensions: frozenset[str] = frozenset()
    line_comment_markers: tuple[str, ...] = ()
    block_comment_pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for marker in self.line_comment_markers:
            if not marker:
                raise InvalidInputError(f"{self.name}: empty line-comment marker")
        for pair in self.block_comment_pairs:
            if len(pair) != 2 or not pair[0] or not pair[1]:
                raise InvalidInputError(f"{self.name}: bad block-comment pair {pair!r}")
        object.__setattr__(
            self, "file_extensions", frozenset(e.lower().lstrip(".") for e in self.file_extensions)
        )


# Files without a known extension: whitespace vs. code only.
EMPTY_PROFILE = LanguageProfile("plain")


@dataclass(frozen=True)
class LexState:
    in_block_comment: bool = False
    open_marker_index: int | None = None

    def __post_init__(self):
        if self.in_block_comment != (self.open_marker_index is not None):
            raise InvalidInputError("open_marker_index must be set iff inside a block comment")


NOT_IN_BLOCK = LexState()


class ProfileSet:
    """Extension -> profile lookup; an extension may belong to one profile only."""

    def __init__(self, profiles: Iterable[LanguageProfile]):
        self.profiles = tuple(profiles)
        self._by_ext: dict[str, LanguageProfile] = {}
        for profile in self.profiles:
            for ext in profile.file_extensions:
                if ext in self._by_ext:
                    raise InvalidInputError(
                        f"extension {ext!r} in both {self._by_ext[ext].name!r} and {profile.name!r}"
                    )
                self._by_ext[ext] = profile

    def for_path(self, path: str) -> LanguageProfile:
        base = os.path.basename(path)
        _, ext = os.path.splitext(base)
        return self._by_ext.get(ext.lower().lstrip("."), EMPTY_PROFILE)

    def __iter__(self):
        return iter(self.profiles)

    def __len__(self):
        return len(self.profiles)

    @classmethod
    def from_document(cls, doc) -> ProfileSet:
        """Build from ``{"profiles": [{"name", "extensions", "line_markers", "block_pairs"}]}``
        or a bare list of such entries."""
        entries = doc.get("profiles", []) if isinstance(doc, dict) else doc
        profiles = []
        for i, entry in enumerate(entries):
            profiles.append(
                LanguageProfile(
                    name=entry.get("name", f"profile{i}"),
                    file_extensions=frozenset(entry.get("extensions", ())),
                    line_comment_markers=tuple(entry.get("line_markers", ())),
                    block_comment_pairs=tuple(tuple(p) for p in entry.get("block_pairs", ())),
                )
            )
        return cls(profiles)

    def to_document(self) -> dict:
        return {
            "profiles": [
                {
                    "name": p.name,
                    "extensions": sorted(p.file_extensions),
                    "line_markers": list(p.line_comment_markers),
                    "block_pairs": [list(bp) for bp in p.block_comment_pairs],
                }
                for p in self.profiles
            ]
        }


C_FAMILY = LanguageProfile(
    "c-family",
    frozenset(
        ["c", "h", "cc", "cpp", "cxx", "hpp", "hh", "hxx", "java", "kt", "kts", "scala", "groovy", "gradle", "js", "jsx", "mjs", "ts", "tsx", "cs", "go", "swift", "rs", "m", "mm", "dart", "css", "less", "scss", "proto"]
    ),
    ("//",),
    (("/*", "*/"),),
)
SCRIPTING = LanguageProfile(
    "hash",
    frozenset(["py", "pyw", "sh", "bash", "zsh", "rb", "pl", "pm", "r", "yaml", "yml", "toml", "cfg", "conf", "properties", "mk", "cmake", "ps1", "tcl"]),
    ("#",),
)
SQL = LanguageProfile("sql", frozenset({"sql"}), ("--",), (("/*", "*/"),))
MARKUP = LanguageProfile(
    "markup",
    frozenset(["xml", "html", "htm", "xhtml", "xsd", "xsl", "xslt", "svg", "vue", "fxml", "iml", "pom"]),
    (),
    (("<!--", "-->"),),
)


def default_profiles() -> ProfileSet:
    return ProfileSet([C_FAMILY, SCRIPTING, SQL, MARKUP])


def load_profiles(path: str | os.PathLike) -> ProfileSet:
    """Load a profile set from a ``.json`` or ``.toml`` document."""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    else:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    return ProfileSet.from_document(doc)


def classify_line(
    text: str, profile: LanguageProfile, state: LexState = NOT_IN_BLOCK
) -> tuple[LineClass, LexState]:
    """Classify one changed line and return the block-comment state after it.

    Code anywhere on the line (including before a trailing comment) makes the
    whole line code. Block comments close at the earliest close marker. String
    literals are not tracked, so a marker inside a string starts a comment.
    """
    pos = 0
    n = len(text)
    has_code = False
    has_comment = state.in_block_comment
    open_idx = state.open_marker_index
    pairs = profile.block_comment_pairs

    while pos < n:
        if open_idx is not None:
            close = pairs[open_idx][1]
            end = text.find(close, pos)
            if end < 0:
                pos = n
                break
            pos = end + len(close)
            open_idx = None
            continue

        # earliest marker wins; at equal positions the longer marker wins
        best_at, best_len, best_kind, best_idx = -1, 0, None, -1
        for marker in profile.line_comment_markers:
            at = text.find(marker, pos)
            if at >= 0 and (best_at < 0 or at < best_at or (at == best_at and len(marker) > best_len)):
                best_at, best_len, best_kind, best_idx = at, len(marker), "line", -1
        for i, (opener, _) in enumerate(pairs):
            at = text.find(opener, pos)
            if at >= 0 and (best_at < 0 or at < best_at or (at == best_at and len(opener) > best_len)):
                best_at, best_len, best_kind, best_idx = at, len(opener), "block", i

        if best_at < 0:
            if text[pos:].strip():
                has_code = True
            break
        if text[pos:best_at].strip():
            has_code = True
        has_comment = True
        if best_kind == "line":
            break
        open_idx = best_idx
        pos = best_at + best_len

    new_state = NOT_IN_BLOCK if open_idx is None else LexState(True, open_idx)
    if has_code:
        return LineClass.CODE, new_state
    if has_comment:
        return LineClass.COMMENT, new_state
    return LineClass.WHITESPACE, new_state


def classify_lines(
    lines: Iterable[str], profile: LanguageProfile, state: LexState = NOT_IN_BLOCK
) -> tuple[list[LineClass], LexState]:
    classes = []
    for line in lines:
        cls, state = classify_line(line, profile, state)
        classes.append(cls)
    return classes, state


def count_code_lines(lines: Iterable[str], profile: LanguageProfile) -> int:
    classes, _ = classify_lines(lines, profile)
    return sum(1 for c in classes if c is LineClass.CODE)


@dataclass(frozen=True)
class HunkChange:
    lines_added_gross: int = 0
    lines_deleted_gross: int = 0
    lines_added_net: int = 0
    lines_deleted_net: int = 0

    def __post_init__(self):
        if min(self.lines_added_gross, self.lines_deleted_gross,
               self.lines_added_net, self.lines_deleted_net) < 0:
            raise InvalidInputError("negative line count")
        if self.lines_added_net > self.lines_added_gross or self.lines_deleted_net > self.lines_deleted_gross:
            raise InvalidInputError("net line count exceeds gross")


def analyze_hunk(
    added_lines: Sequence[str], deleted_lines: Sequence[str], profile: LanguageProfile
) -> HunkChange:
    """Gross and net counts for one hunk; each side is lexed from a fresh state."""
    return HunkChange(
        lines_added_gross=len(added_lines),
        lines_deleted_gross=len(deleted_lines),
        lines_added_net=count_code_lines(added_lines, profile),
        lines_deleted_net=count_code_lines(deleted_lines, profile),
    )


class ChangeKind(enum.Enum):
    ADDED = "added"
    DELETED = "deleted"
    MODIFIED = "modified"
    RENAMED = "renamed"


RENAME_THRESHOLD = 0.5


@dataclass(frozen=True)
class FileChange:
    path: str
    kind: ChangeKind
    hunks: tuple[HunkChange, ...] = ()
    similarity: float | None = None
    lines_added_gross: int = 0
    lines_deleted_gross: int = 0
    lines_added_net: int = 0
    lines_deleted_net: int = 0
    affected_net: bool = False
    old_path: str | None = None

    @property
    def net_lines(self) -> int:
        return self.lines_added_net + self.lines_deleted_net

    @property
    def gross_lines(self) -> int:
        return self.lines_added_gross + self.lines_deleted_gross


def aggregate_file(
    kind: ChangeKind,
    hunks: Sequence[HunkChange],
    *,
    path: str = "",
    similarity: float | None = None,
    old_path: str | None = None,
) -> FileChange:
    """Sum hunk counts into a :class:`FileChange`.

    A file whose hunks carry no net lines is not affected in net terms, so it
    does not count toward net file counts.
    """
    hunks = tuple(hunks)
    added_g = sum(h.lines_added_gross for h in hunks)
    deleted_g = sum(h.lines_deleted_gross for h in hunks)
    added_n = sum(h.lines_added_net for h in hunks)
    deleted_n = sum(h.lines_deleted_net for h in hunks)
    if kind is ChangeKind.ADDED and deleted_g:
        raise InvalidInputError(f"{path}: added file with deleted lines")
    if kind is ChangeKind.DELETED and added_g:
        raise InvalidInputError(f"{path}: deleted file with added lines")
    if kind is ChangeKind.RENAMED:
        if similarity is None or not RENAME_THRESHOLD <= similarity <= 1.0:
            raise InvalidInputError(f"{path}: rename similarity {similarity!r} outside [0.5, 1]")
    elif similarity is not None:
        raise InvalidInputError(f"{path}: similarity only applies to renames")
    return FileChange(
        path=path,
        kind=kind,
        hunks=hunks,
        similarity=similarity,
        lines_added_gross=added_g,
        lines_deleted_gross=deleted_g,
        lines_added_net=added_n,
        lines_deleted_net=deleted_n,
        affected_net=(added_n + deleted_n) > 0,
        old_path=old_path,
    )


class RenameOutcome(enum.Enum):
    PURE = "pure"  # identical content, no line changes
    IMPURE = "impure"  # renamed, carrying a content diff
    SPLIT = "split"  # below threshold: one deleted and one added file

    @property
    def kinds(self) -> tuple[ChangeKind, ...]:
        if self is RenameOutcome.SPLIT:
            return (ChangeKind.DELETED, ChangeKind.ADDED)
        return (ChangeKind.RENAMED,)


def line_similarity(old_lines: Sequence[str], new_lines: Sequence[str]) -> float:
    """Size of the line-multiset intersection over the longer side."""
    if not old_lines or not new_lines:
        raise InvalidInputError("similarity needs two non-empty line sequences")
    common = sum((Counter(old_lines) & Counter(new_lines)).values())
    return common / max(len(old_lines), len(new_lines))


def rename_similarity(
    old_lines: Sequence[str], new_lines: Sequence[str]
) -> tuple[float, RenameOutcome]:
    ratio = line_similarity(old_lines, new_lines)
    return ratio, resolve_rename(ratio)


def resolve_rename(ratio: float) -> RenameOutcome:
    if ratio >= 1.0:
        return RenameOutcome.PURE
    if ratio >= RENAME_THRESHOLD:
        return RenameOutcome.IMPURE
    return RenameOutcome.SPLIT
