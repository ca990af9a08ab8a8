"""Per-commit size and density features mined from a git repository."""

from __future__ import annotations

import csv
import enum
import io
import logging
import os
import subprocess
from collections.abc import Iterable, Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .diffcore import (
    ChangeKind,
    FileChange,
    ProfileSet,
    RenameOutcome,
    aggregate_file,
    analyze_hunk,
    default_profiles,
    line_similarity,
    resolve_rename,
)

log = logging.getLogger(__name__)

FILE_FEATURES = ("files_added", "files_deleted", "files_renamed", "files_modified")
LINE_FEATURES = (
    "lines_added_by_added",
    "lines_deleted_by_deleted",
    "lines_added_by_modified",
    "lines_deleted_by_modified",
    "lines_added_by_renamed",
    "lines_deleted_by_renamed",
)
COUNT_FEATURES = tuple(f"{base}_{s}" for base in FILE_FEATURES + LINE_FEATURES for s in ("g", "n"))
RATIO_FEATURES = ("affected_files_ratio_net", "density")
SIZE_FEATURES = COUNT_FEATURES + RATIO_FEATURES
IDENTITY_COLUMNS = ("sha1", "parent_sha1", "project", "timestamp", "is_merge")
CSV_COLUMNS = IDENTITY_COLUMNS + SIZE_FEATURES

NET_SIZE_FEATURES = tuple(f for f in COUNT_FEATURES if f.endswith("_n")) + RATIO_FEATURES
GROSS_SIZE_FEATURES = tuple(f for f in COUNT_FEATURES if f.endswith("_g"))

EMPTY_TREE = "4b825dc642cb6eb9a060e54bf8d69288fbee4904"
NULL_SHA = "0" * 40
GENERATIONS = (1, 2, 3, 5, 8)


class MinerError(Exception):
    pass


class ConfigurationError(MinerError):
    pass


class CommitNotFoundError(MinerError, LookupError):
    pass


class GitError(MinerError):
    pass


def _ratio(numerator: int, denominator: int) -> float:
    # zero denominators yield 0 so the ratio stays total and bounded
    return numerator / denominator if denominator else 0.0


def _total(values) -> int:
    if isinstance(values, (int, float)):
        return values
    return sum(values)


def commit_density(gross_lines, net_lines) -> float:
    """Net over gross changed lines; each argument is a count or iterable of counts."""
    return _ratio(_total(net_lines), _total(gross_lines))


def affected_files_ratio_net(gross_files, net_files) -> float:
    return _ratio(_total(net_files), _total(gross_files))


@dataclass
class CommitSizeRecord:
    sha1: str
    parent_sha1: str | None = None
    project: str = ""
    timestamp: int = 0
    is_merge: bool = False
    files_added_g: int = 0
    files_added_n: int = 0
    files_deleted_g: int = 0
    files_deleted_n: int = 0
    files_renamed_g: int = 0
    files_renamed_n: int = 0
    files_modified_g: int = 0
    files_modified_n: int = 0
    lines_added_by_added_g: int = 0
    lines_added_by_added_n: int = 0
    lines_deleted_by_deleted_g: int = 0
    lines_deleted_by_deleted_n: int = 0
    lines_added_by_modified_g: int = 0
    lines_added_by_modified_n: int = 0
    lines_deleted_by_modified_g: int = 0
    lines_deleted_by_modified_n: int = 0
    lines_added_by_renamed_g: int = 0
    lines_added_by_renamed_n: int = 0
    lines_deleted_by_renamed_g: int = 0
    lines_deleted_by_renamed_n: int = 0
    affected_files_ratio_net: float = 0.0
    density: float = 0.0

    def features(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in SIZE_FEATURES}

    @property
    def gross_lines(self) -> int:
        return sum(getattr(self, f"{b}_g") for b in LINE_FEATURES)

    @property
    def net_lines(self) -> int:
        return sum(getattr(self, f"{b}_n") for b in LINE_FEATURES)

    @property
    def gross_files(self) -> int:
        return sum(getattr(self, f"{b}_g") for b in FILE_FEATURES)

    @property
    def net_files(self) -> int:
        return sum(getattr(self, f"{b}_n") for b in FILE_FEATURES)


_KIND_PREFIX = {
    ChangeKind.ADDED: "added",
    ChangeKind.DELETED: "deleted",
    ChangeKind.MODIFIED: "modified",
    ChangeKind.RENAMED: "renamed",
}


def size_record(
    changes: Iterable[FileChange],
    *,
    sha1: str,
    parent_sha1: str | None = None,
    project: str = "",
    timestamp: int = 0,
) -> CommitSizeRecord:
    """Fold the file changes of one non-merge commit into a record."""
    rec = CommitSizeRecord(sha1=sha1, parent_sha1=parent_sha1, project=project, timestamp=timestamp)
    for fc in changes:
        kind = _KIND_PREFIX[fc.kind]
        _bump(rec, f"files_{kind}_g", 1)
        _bump(rec, f"files_{kind}_n", int(fc.affected_net))
        if fc.kind is not ChangeKind.DELETED:
            _bump(rec, f"lines_added_by_{kind}_g", fc.lines_added_gross)
            _bump(rec, f"lines_added_by_{kind}_n", fc.lines_added_net)
        if fc.kind is not ChangeKind.ADDED:
            _bump(rec, f"lines_deleted_by_{kind}_g", fc.lines_deleted_gross)
            _bump(rec, f"lines_deleted_by_{kind}_n", fc.lines_deleted_net)
    rec.density = commit_density(rec.gross_lines, rec.net_lines)
    rec.affected_files_ratio_net = affected_files_ratio_net(rec.gross_files, rec.net_files)
    return rec


def _bump(rec, name, amount):
    setattr(rec, name, getattr(rec, name) + amount)


# --- git plumbing ---------------------------------------------------------


class GitRepository:
    """Thin wrapper running the git CLI against one local clone."""

    def __init__(self, path: str | os.PathLike, project: str | None = None, git: str = "git"):
        self.path = Path(path)
        self.git_exe = git
        if not self.path.is_dir():
            raise ConfigurationError(f"repository path does not exist: {self.path}")
        try:
            self.run("rev-parse", "--git-dir")
        except GitError as exc:
            raise ConfigurationError(f"not a git repository: {self.path}") from exc
        self.project = project or self.path.resolve().name

    def run(self, *args: str) -> bytes:
        cmd = [self.git_exe, "-C", str(self.path), "-c", "core.quotepath=off", *args]
        proc = subprocess.run(cmd, capture_output=True, check=False)
        if proc.returncode != 0:
            raise GitError(f"{' '.join(args[:2])} failed: {proc.stderr.decode(errors='replace').strip()}")
        return proc.stdout

    def resolve(self, rev: str) -> str:
        try:
            return self.run("rev-parse", "--verify", "--quiet", f"{rev}^{{commit}}").decode().strip()
        except GitError as exc:
            raise CommitNotFoundError(f"cannot resolve commit {rev!r}") from exc

    def commit_header(self, sha1: str) -> tuple[list[str], int]:
        out = self.run("show", "-s", "--format=%P%x00%at", sha1).decode().strip()
        parents, ts = out.split("\x00")
        return parents.split(), int(ts)


@dataclass
class _FileDiff:
    path: str
    status: str
    old_blob: str = NULL_SHA
    new_blob: str = NULL_SHA
    binary: bool = False
    hunks: list[tuple[list[str], list[str]]] = field(default_factory=list)

    def added_lines(self) -> list[str]:
        return [line for added, _ in self.hunks for line in added]

    def deleted_lines(self) -> list[str]:
        return [line for _, deleted in self.hunks for line in deleted]


_DIFF_OPTS = ("--no-color", "--no-ext-diff", "--no-textconv", "--full-index", "--ignore-submodules=all")


def _decode(raw: bytes) -> str:
    text = raw.decode("utf-8", errors="replace")
    return text.removesuffix("\r")


def parse_patch(patch: bytes) -> list[_FileDiff]:
    """Split ``git diff -p`` output into per-file sections with hunk line lists."""
    files: list[_FileDiff] = []
    current: _FileDiff | None = None
    in_body = False
    hunk = None
    for raw in patch.split(b"\n"):
        if raw.startswith(b"diff --git "):
            current = _FileDiff(path="", status="M")
            files.append(current)
            in_body = False
            hunk = None
            continue
        if current is None:
            continue
        if not in_body:
            if raw.startswith(b"new file mode"):
                current.status = "A"
            elif raw.startswith(b"deleted file mode"):
                current.status = "D"
            elif raw.startswith(b"index "):
                blobs = raw[6:].split(b" ")[0].decode()
                old, _, new = blobs.partition("..")
                current.old_blob, current.new_blob = old, new
            elif raw.startswith((b"Binary files ", b"GIT binary patch")):
                current.binary = True
            elif raw.startswith(b"+++ "):
                in_body = True
            continue
        if raw.startswith(b"@@"):
            hunk = ([], [])
            current.hunks.append(hunk)
        elif hunk is None:
            continue
        elif raw.startswith(b"+"):
            hunk[0].append(_decode(raw[1:]))
        elif raw.startswith(b"-"):
            hunk[1].append(_decode(raw[1:]))
    return files


def _parse_raw_paths(raw: bytes) -> list[tuple[str, str]]:
    """(status, path) pairs from ``diff-tree --raw -z`` output."""
    parts = raw.split(b"\x00")
    out = []
    i = 0
    while i < len(parts) - 1:
        meta = parts[i]
        if not meta.startswith(b":"):
            i += 1
            continue
        status = meta.split(b" ")[-1].decode()[:1]
        out.append((status, parts[i + 1].decode("utf-8", errors="replace")))
        i += 2
    return out


@dataclass
class MiningStats:
    commits: int = 0
    merges: int = 0
    skipped_files: int = 0
    rename_pairs_skipped: int = 0


def _commit_diffs(repo: GitRepository, sha1: str, parent: str | None) -> list[_FileDiff]:
    base = parent or EMPTY_TREE
    raw = repo.run("diff-tree", "-r", "-z", "--raw", "--no-renames", *_DIFF_OPTS, base, sha1)
    patch = repo.run("diff-tree", "-r", "-p", "--no-renames", *_DIFF_OPTS, base, sha1)
    entries = _parse_raw_paths(raw)
    diffs = parse_patch(patch)
    if len(entries) != len(diffs):
        raise GitError(f"{sha1}: raw/patch entry mismatch ({len(entries)} vs {len(diffs)})")
    for (status, path), diff in zip(entries, diffs):
        diff.path = path
        if status in "AD":
            diff.status = status
    return diffs


def _blob_hunks(repo: GitRepository, old_blob: str, new_blob: str):
    patch = repo.run("diff", *_DIFF_OPTS, old_blob, new_blob)
    parsed = parse_patch(patch)
    return parsed[0].hunks if parsed else []


def pair_renames(
    deleted: Sequence[_FileDiff], added: Sequence[_FileDiff], pair_limit: int = 250_000
) -> list[tuple[_FileDiff, _FileDiff, float]]:
    """Greedy best-first pairing of deleted and added files at similarity >= 0.5.

    Identical blobs pair at 1.0. Text pairs use the line-multiset similarity;
    when ``len(deleted) * len(added)`` exceeds ``pair_limit`` only identical
    blobs are paired.
    """
    candidates = []
    for d in deleted:
        for a in added:
            if d.old_blob == a.new_blob and d.old_blob != NULL_SHA:
                candidates.append((1.0, d.path, a.path, d, a))
    if len(deleted) * len(added) <= pair_limit:
        old_lines = {id(d): d.deleted_lines() for d in deleted if not d.binary}
        new_lines = {id(a): a.added_lines() for a in added if not a.binary}
        for d in deleted:
            lo = old_lines.get(id(d))
            if not lo:
                continue
            for a in added:
                ln = new_lines.get(id(a))
                if not ln or d.old_blob == a.new_blob:
                    continue
                # similarity can never exceed the length ratio
                if min(len(lo), len(ln)) < 0.5 * max(len(lo), len(ln)):
                    continue
                ratio = line_similarity(lo, ln)
                if resolve_rename(ratio) is not RenameOutcome.SPLIT:
                    candidates.append((ratio, d.path, a.path, d, a))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_d, used_a, pairs = set(), set(), []
    for ratio, _, _, d, a in candidates:
        if id(d) in used_d or id(a) in used_a:
            continue
        used_d.add(id(d))
        used_a.add(id(a))
        pairs.append((d, a, ratio))
    return pairs


def file_changes(
    diffs: Sequence[_FileDiff],
    profiles: ProfileSet,
    content_hunks=None,
    stats: MiningStats | None = None,
    pair_limit: int = 250_000,
) -> list[FileChange]:
    """Turn parsed file diffs into :class:`FileChange` objects, resolving renames.

    ``content_hunks(old_blob, new_blob)`` supplies the diff hunks of an impure
    rename; without it the rename is still detected but carries no lines.
    """
    deleted = [d for d in diffs if d.status == "D"]
    added = [d for d in diffs if d.status == "A"]
    if deleted and added:
        pairs = pair_renames(deleted, added, pair_limit)
        if len(deleted) * len(added) > pair_limit and stats is not None:
            stats.rename_pairs_skipped += 1
    else:
        pairs = []
    paired = {id(d) for d, _, _ in pairs} | {id(a) for _, a, _ in pairs}

    out = []
    for d, a, ratio in pairs:
        profile = profiles.for_path(a.path)
        hunks = []
        if resolve_rename(ratio) is RenameOutcome.IMPURE and content_hunks is not None:
            hunks = [analyze_hunk(add, rem, profile) for add, rem in content_hunks(d.old_blob, a.new_blob)]
        out.append(aggregate_file(ChangeKind.RENAMED, hunks, path=a.path, similarity=ratio, old_path=d.path))

    kinds = {"A": ChangeKind.ADDED, "D": ChangeKind.DELETED}
    for diff in diffs:
        if id(diff) in paired:
            continue
        kind = kinds.get(diff.status, ChangeKind.MODIFIED)
        profile = profiles.for_path(diff.path)
        try:
            hunks = [analyze_hunk(add, rem, profile) for add, rem in diff.hunks]
            out.append(aggregate_file(kind, hunks, path=diff.path))
        except ValueError as exc:
            log.warning("skipping %s: %s", diff.path, exc)
            if stats is not None:
                stats.skipped_files += 1
    return out


def extract_commit(
    repo: GitRepository,
    sha1: str,
    profiles: ProfileSet | None = None,
    stats: MiningStats | None = None,
) -> CommitSizeRecord:
    """Size record for one commit, diffed against its single parent.

    Merge commits come back flagged with all features zero.
    """
    sha1 = repo.resolve(sha1)
    parents, ts = repo.commit_header(sha1)
    return _extract(repo, sha1, parents, ts, profiles or default_profiles(), stats)


def _extract(repo, sha1, parents, ts, profiles, stats):
    parent = parents[0] if parents else None
    if len(parents) > 1:
        if stats is not None:
            stats.merges += 1
        return CommitSizeRecord(sha1=sha1, parent_sha1=parent, project=repo.project, timestamp=ts, is_merge=True)
    diffs = _commit_diffs(repo, sha1, parent)
    changes = file_changes(diffs, profiles, lambda o, n: _blob_hunks(repo, o, n), stats)
    if stats is not None:
        stats.commits += 1
    return size_record(changes, sha1=sha1, parent_sha1=parent, project=repo.project, timestamp=ts)


def walk_repo(
    repo: GitRepository | str | os.PathLike,
    branch: str = "HEAD",
    max_commits: int | None = None,
    profiles: ProfileSet | None = None,
    jobs: int = 1,
    stats: MiningStats | None = None,
) -> Iterator[CommitSizeRecord]:
    """Yield one record per first-parent commit, parents before children.

    ``max_commits`` keeps the most recent commits. Extraction may run on
    ``jobs`` threads; the output order does not depend on it.
    """
    if not isinstance(repo, GitRepository):
        repo = GitRepository(repo)
    profiles = profiles or default_profiles()
    args = ["log", "--first-parent", "--topo-order", "--format=%H%x00%P%x00%at"]
    if max_commits is not None:
        args.append(f"--max-count={int(max_commits)}")
    args.append(repo.resolve(branch))
    lines = repo.run(*args).decode().splitlines()
    headers = []
    for line in reversed(lines):
        sha, parents, ts = line.split("\x00")
        headers.append((sha, parents.split(), int(ts)))

    def work(h):
        return _extract(repo, h[0], h[1], h[2], profiles, stats)

    if jobs <= 1:
        yield from map(work, headers)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(work, headers)


# --- generation chains ----------------------------------------------------


class RejectReason(enum.Enum):
    MERGE_IN_WINDOW = "merge-in-window"
    INSUFFICIENT_HISTORY = "insufficient-history"
    UNLABELED_PRINCIPAL = "unlabeled-principal"


class ChainRejected(Exception):
    def __init__(self, reason: RejectReason, sha1: str):
        super().__init__(f"{sha1}: {reason.value}")
        self.reason = reason
        self.sha1 = sha1


@dataclass(frozen=True)
class GenerationChain:
    principal: CommitSizeRecord
    parents: tuple[CommitSizeRecord, ...]
    requested_generations: int

    def __post_init__(self):
        if len(self.parents) != self.requested_generations:
            raise ValueError("chain length does not match requested generations")


def build_generation_chain(
    store: Mapping[str, CommitSizeRecord],
    principal: str,
    generations: int,
    labeled: Iterable[str] | None = None,
) -> GenerationChain:
    """Collect the ``generations`` nearest first-parent ancestors of ``principal``.

    Raises :class:`ChainRejected` when the principal is unlabeled, or when any
    commit in the window (principal included) is a merge or is missing.
    """
    if generations not in GENERATIONS:
        raise ValueError(f"generations must be one of {GENERATIONS}")
    if labeled is not None and principal not in set(labeled):
        raise ChainRejected(RejectReason.UNLABELED_PRINCIPAL, principal)
    head = store.get(principal)
    if head is None:
        raise CommitNotFoundError(principal)
    if head.is_merge:
        raise ChainRejected(RejectReason.MERGE_IN_WINDOW, principal)
    parents = []
    current = head
    for _ in range(generations):
        parent = store.get(current.parent_sha1) if current.parent_sha1 else None
        if parent is None:
            raise ChainRejected(RejectReason.INSUFFICIENT_HISTORY, principal)
        if parent.is_merge:
            raise ChainRejected(RejectReason.MERGE_IN_WINDOW, principal)
        parents.append(parent)
        current = parent
    return GenerationChain(head, tuple(parents), generations)


def build_chains(
    store: Mapping[str, CommitSizeRecord],
    principals: Iterable[str],
    generations: int,
    labeled: Iterable[str] | None = None,
) -> tuple[list[GenerationChain], dict[str, RejectReason]]:
    labeled = set(labeled) if labeled is not None else None
    chains, rejected = [], {}
    for sha in principals:
        try:
            chains.append(build_generation_chain(store, sha, generations, labeled))
        except ChainRejected as exc:
            rejected[sha] = exc.reason
        except CommitNotFoundError:
            rejected[sha] = RejectReason.INSUFFICIENT_HISTORY
    return chains, rejected


# --- CSV ------------------------------------------------------------------


def _fmt(name: str, value) -> str:
    if name in RATIO_FEATURES:
        return f"{value:.6f}"
    if name == "is_merge":
        return "true" if value else "false"
    if name == "parent_sha1":
        return value or ""
    return str(value)


def write_records_csv(records: Iterable[CommitSizeRecord], out) -> int:
    """Write records in the canonical column order; returns the row count."""
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            return write_records_csv(records, fh)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    n = 0
    for rec in records:
        writer.writerow([_fmt(name, getattr(rec, name)) for name in CSV_COLUMNS])
        n += 1
    return n


def records_to_csv(records: Iterable[CommitSizeRecord]) -> str:
    buf = io.StringIO()
    write_records_csv(records, buf)
    return buf.getvalue()


def read_records_csv(path: str | os.PathLike) -> list[CommitSizeRecord]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            kwargs = {}
            for name in CSV_COLUMNS:
                value = row[name]
                if name in RATIO_FEATURES:
                    kwargs[name] = float(value)
                elif name == "is_merge":
                    kwargs[name] = value.strip().lower() in ("true", "1", "yes")
                elif name == "parent_sha1":
                    kwargs[name] = value or None
                elif name in ("sha1", "project"):
                    kwargs[name] = value
                else:
                    kwargs[name] = int(value)
            out.append(CommitSizeRecord(**kwargs))
    return out
