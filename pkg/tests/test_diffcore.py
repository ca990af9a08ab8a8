import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commit_density.diffcore import (
    C_FAMILY,
    EMPTY_PROFILE,
    MARKUP,
    NOT_IN_BLOCK,
    SCRIPTING,
    SQL,
    ChangeKind,
    HunkChange,
    InvalidInputError,
    LanguageProfile,
    LexState,
    LineClass,
    ProfileSet,
    RenameOutcome,
    aggregate_file,
    analyze_hunk,
    classify_line,
    classify_lines,
    default_profiles,
    line_similarity,
    load_profiles,
    rename_similarity,
    resolve_rename,
)

CODE, COMMENT, WS = LineClass.CODE, LineClass.COMMENT, LineClass.WHITESPACE


@pytest.mark.parametrize(
    "text, expected",
    [
        ("int x = 1;", CODE),
        ("// note", COMMENT),
        ("   ", WS),
        ("", WS),
        ("x = 1; // trailing", CODE),
        ("/* a */ int b;", CODE),
        ("/* a */ /* b */", COMMENT),
    ],
)
def test_classify_single_lines(text, expected):
    assert classify_line(text, C_FAMILY)[0] is expected


def test_block_comment_spans_lines():
    classes, state = classify_lines(["/* start", "", "middle", "end */ int y;"], C_FAMILY)
    assert classes == [COMMENT, COMMENT, COMMENT, CODE]
    assert state == NOT_IN_BLOCK


def test_block_state_is_returned_open():
    cls, state = classify_line("f(); /* open", C_FAMILY)
    assert cls is CODE
    assert state.in_block_comment and state.open_marker_index == 0


def test_block_closes_at_first_marker():
    cls, state = classify_line("/* a */ b */", C_FAMILY)
    assert cls is CODE
    assert not state.in_block_comment


def test_longer_marker_wins_at_same_position():
    prof = LanguageProfile("x", frozenset({"x"}), ("-",), (("-{", "}-"),))
    cls, state = classify_line("-{ comment", prof)
    assert cls is COMMENT and state.in_block_comment


def test_markers_are_profile_specific():
    assert classify_line("# heading", SCRIPTING)[0] is COMMENT
    assert classify_line("# heading", C_FAMILY)[0] is CODE
    assert classify_line("-- c", SQL)[0] is COMMENT
    assert classify_line("<!-- c -->", MARKUP)[0] is COMMENT
    assert classify_line("// c", EMPTY_PROFILE)[0] is CODE
    assert classify_line("\t", EMPTY_PROFILE)[0] is WS


def test_lex_state_invariant():
    with pytest.raises(InvalidInputError):
        LexState(True, None)
    with pytest.raises(InvalidInputError):
        LexState(False, 0)


def test_profile_validation():
    with pytest.raises(InvalidInputError):
        LanguageProfile("bad", line_comment_markers=("",))
    with pytest.raises(InvalidInputError):
        LanguageProfile("bad", block_comment_pairs=(("/*", ""),))
    assert LanguageProfile("p", frozenset({".PY"})).file_extensions == frozenset({"py"})


def test_profile_lookup_and_duplicates():
    profiles = default_profiles()
    assert profiles.for_path("src/Main.java") is C_FAMILY
    assert profiles.for_path("a/b/setup.py") is SCRIPTING
    assert profiles.for_path("README") is EMPTY_PROFILE
    assert profiles.for_path("notes.txt") is EMPTY_PROFILE
    with pytest.raises(InvalidInputError):
        ProfileSet([C_FAMILY, LanguageProfile("dup", frozenset({"c"}))])


def test_profile_documents_round_trip(tmp_path):
    doc = default_profiles().to_document()
    path = tmp_path / "profiles.json"
    path.write_text(json.dumps(doc))
    loaded = load_profiles(path)
    assert [p.name for p in loaded] == [p.name for p in default_profiles()]
    assert loaded.for_path("x.sql").block_comment_pairs == SQL.block_comment_pairs


def test_toml_profiles(tmp_path):
    path = tmp_path / "profiles.toml"
    path.write_text(
        '[[profiles]]\nname = "lua"\nextensions = ["lua"]\nline_markers = ["--"]\n'
        'block_pairs = [["--[[", "]]"]]\n'
    )
    prof = load_profiles(path).for_path("init.lua")
    assert prof.name == "lua"
    assert classify_line("--[[ block", prof)[1].in_block_comment
    assert classify_line("-- line", prof) == (COMMENT, NOT_IN_BLOCK)


def test_analyze_hunk_counts():
    hunk = analyze_hunk(["int a;", "// c", "", "b();"], ["/* old */", "c();"], C_FAMILY)
    assert hunk == HunkChange(4, 2, 2, 1)


def test_each_hunk_side_starts_fresh():
    # an unterminated block in the deleted side must not leak into the added side
    hunk = analyze_hunk(["x();"], ["/* open"], C_FAMILY)
    assert hunk.lines_added_net == 1


def test_hunk_change_rejects_net_above_gross():
    with pytest.raises(InvalidInputError):
        HunkChange(1, 0, 2, 0)
    with pytest.raises(InvalidInputError):
        HunkChange(-1, 0, 0, 0)


def test_aggregate_file_and_affected_net():
    comment_only = aggregate_file(ChangeKind.MODIFIED, [HunkChange(2, 1, 0, 0)], path="a.c")
    assert comment_only.gross_lines == 3 and comment_only.net_lines == 0
    assert not comment_only.affected_net
    real = aggregate_file(ChangeKind.MODIFIED, [HunkChange(1, 0, 1, 0), HunkChange(0, 2, 0, 1)])
    assert (real.lines_added_net, real.lines_deleted_net, real.affected_net) == (1, 1, True)


def test_aggregate_file_consistency_checks():
    with pytest.raises(InvalidInputError):
        aggregate_file(ChangeKind.ADDED, [HunkChange(0, 1, 0, 0)])
    with pytest.raises(InvalidInputError):
        aggregate_file(ChangeKind.DELETED, [HunkChange(1, 0, 0, 0)])
    with pytest.raises(InvalidInputError):
        aggregate_file(ChangeKind.RENAMED, [], similarity=0.3)
    with pytest.raises(InvalidInputError):
        aggregate_file(ChangeKind.MODIFIED, [], similarity=1.0)
    assert aggregate_file(ChangeKind.RENAMED, [], similarity=1.0).gross_lines == 0


def test_rename_similarity_boundaries():
    assert resolve_rename(1.0) is RenameOutcome.PURE
    assert resolve_rename(0.5) is RenameOutcome.IMPURE
    assert resolve_rename(0.4999) is RenameOutcome.SPLIT
    assert RenameOutcome.SPLIT.kinds == (ChangeKind.DELETED, ChangeKind.ADDED)
    assert rename_similarity(["a", "b"], ["b", "a"]) == (1.0, RenameOutcome.PURE)
    assert line_similarity(["a", "a", "b"], ["a", "c", "d", "e"]) == 0.25
    with pytest.raises(InvalidInputError):
        line_similarity([], ["a"])


line_text = st.text(alphabet=st.sampled_from(list("ab /*#-<!>\t")), max_size=20)


@settings(max_examples=300, deadline=None)
@given(st.lists(line_text, max_size=30), st.sampled_from([C_FAMILY, SCRIPTING, SQL, MARKUP, EMPTY_PROFILE]))
def test_net_never_exceeds_gross(lines, profile):
    hunk = analyze_hunk(lines, lines[::-1], profile)
    assert 0 <= hunk.lines_added_net <= hunk.lines_added_gross == len(lines)
    assert hunk.lines_deleted_net <= hunk.lines_deleted_gross


@settings(max_examples=300, deadline=None)
@given(st.lists(line_text, max_size=15))
def test_whitespace_lines_are_never_code(lines):
    classes, _ = classify_lines(lines, C_FAMILY)
    for text, cls in zip(lines, classes):
        if not text.strip():
            assert cls is not CODE


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(["x", "y", "z", "w"]), min_size=1, max_size=12),
       st.lists(st.sampled_from(["x", "y", "z", "w"]), min_size=1, max_size=12))
def test_similarity_is_symmetric_and_bounded(a, b):
    s = line_similarity(a, b)
    assert s == line_similarity(b, a)
    assert 0.0 <= s <= 1.0
    assert (s == 1.0) == (sorted(a) == sorted(b))
