"""Strength-table and recommendation tests."""

import numpy as np
import pytest

from dropbench.advisor import (
    StrengthEntry,
    StrengthTable,
    builtin_table,
    load_table_csv,
    merge_campaign_result,
    recommend,
    table_csv,
    validate_monotonicity,
)
from dropbench.campaign import PartSpec
from dropbench.errors import EntryNotFoundError, InfeasibleTargetError, InvalidInputError


class TestBuiltinTable:
    def test_entries(self):
        table = builtin_table()
        assert len(table.entries) == 4
        assert table.lookup(1.0, 6).mean_breaking_force_n == 75.6
        assert table.lookup(1.0, 3).mean_breaking_force_n == 65.0
        assert table.lookup(2.0, 6).mean_breaking_force_n == 53.1
        assert table.lookup(2.0, 3).mean_breaking_force_n == 45.0

    def test_missing_entry(self):
        with pytest.raises(EntryNotFoundError):
            builtin_table().lookup(3.0, 3)

    def test_functional_floor_default(self):
        assert builtin_table().f_min_functional_n == 25.0

    def test_duplicates_rejected(self):
        with pytest.raises(InvalidInputError):
            StrengthTable(entries=(StrengthEntry(1.0, 3, 65.0), StrengthEntry(1.0, 3, 60.0)))

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            StrengthTable(entries=())


class TestMonotonicity:
    def test_builtin_passes(self):
        assert validate_monotonicity(builtin_table()) == []

    def test_slot_depth_violation(self):
        table = StrengthTable(entries=(StrengthEntry(1.0, 3, 65.0), StrengthEntry(2.0, 3, 70.0)))
        violations = validate_monotonicity(table)
        assert len(violations) == 1
        assert "slot depth" in violations[0]

    def test_wall_loop_violation(self):
        table = StrengthTable(entries=(StrengthEntry(1.0, 3, 65.0), StrengthEntry(1.0, 6, 60.0)))
        violations = validate_monotonicity(table)
        assert len(violations) == 1
        assert "wall loops" in violations[0]

    def test_single_entry_vacuous(self):
        assert validate_monotonicity(StrengthTable(entries=(StrengthEntry(1.0, 3, 65.0),))) == []


class TestRecommend:
    def test_target_65(self):
        rec = recommend(65.0)
        assert (rec.entry.slot_depth_mm, rec.entry.wall_loops) == (1.0, 3)
        assert rec.entry.mean_breaking_force_n == 65.0
        assert rec.margin_n == 0.0

    def test_target_50_never_exceeds(self):
        rec = recommend(50.0)
        assert (rec.entry.slot_depth_mm, rec.entry.wall_loops) == (2.0, 3)
        assert rec.entry.mean_breaking_force_n == 45.0
        assert rec.margin_n == pytest.approx(5.0)

    def test_target_20_infeasible(self):
        with pytest.raises(InfeasibleTargetError, match="25"):
            recommend(20.0)

    def test_floor_boundary(self):
        with pytest.raises(InfeasibleTargetError):
            recommend(25.0)
        assert recommend(45.0).entry.mean_breaking_force_n == 45.0

    def test_all_entries_overshoot(self):
        rec = recommend(30.0)
        assert rec.entry.mean_breaking_force_n == 45.0  # weakest
        assert rec.margin_n == pytest.approx(-15.0)
        assert rec.note is not None and "warning" in rec.note.lower()

    def test_never_exceed_invariant(self):
        for target in np.linspace(26.0, 100.0, 149):
            rec = recommend(float(target))
            assert rec.entry.mean_breaking_force_n <= target or rec.note is not None

    def test_monotone_in_target(self):
        last = 0.0
        for target in np.linspace(26.0, 100.0, 149):
            force = recommend(float(target)).entry.mean_breaking_force_n
            assert force >= last
            last = force


class TestMerge:
    def test_idempotent_replace(self):
        merged = merge_campaign_result(builtin_table(), PartSpec(1.0, 3), 65.0)
        assert merged.violations == ()
        assert sorted(
            (e.slot_depth_mm, e.wall_loops, e.mean_breaking_force_n) for e in merged.table.entries
        ) == sorted(
            (e.slot_depth_mm, e.wall_loops, e.mean_breaking_force_n)
            for e in builtin_table().entries
        )

    def test_new_entry_keeps_monotone(self):
        merged = merge_campaign_result(builtin_table(), PartSpec(1.5, 3), 55.0)
        assert len(merged.table.entries) == 5
        assert merged.violations == ()

    def test_violation_flagged(self):
        # 90 N at (1.0, 3) sits above the 75.6 N of (1.0, 6): the wall-loop
        # ordering breaks (slot-depth ordering survives, 90 > 45 at w=3).
        merged = merge_campaign_result(builtin_table(), PartSpec(1.0, 3), 90.0)
        assert any("wall loops" in v for v in merged.violations)

    def test_merge_then_lookup_round_trip(self):
        merged = merge_campaign_result(builtin_table(), PartSpec(1.5, 4), 58.7)
        assert merged.table.lookup(1.5, 4).mean_breaking_force_n == 58.7

    def test_bad_force(self):
        with pytest.raises(InvalidInputError):
            merge_campaign_result(builtin_table(), PartSpec(1.0, 3), 0.0)


class TestCsv:
    def test_round_trip(self):
        table = builtin_table()
        text = table_csv(table)
        assert text.splitlines()[0] == "slot_depth_mm,wall_loops,mean_breaking_force_n"
        back = load_table_csv(text)
        assert back.entries == table.entries

    def test_file_round_trip(self, tmp_path):
        p = tmp_path / "table.csv"
        p.write_text(table_csv(builtin_table()))
        assert load_table_csv(p).entries == builtin_table().entries

    def test_bad_header(self):
        with pytest.raises(InvalidInputError):
            load_table_csv("a,b,c\n1,2,3\n")
