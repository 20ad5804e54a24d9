#include <gtest/gtest.h>

#include <evac/building.hpp>
#include <evac/scenario.hpp>

#include <algorithm>
#include <stdexcept>

#include "support.hpp"

using namespace evac;

namespace {

Building two_floor(double stair_length = 8.0, StaircaseKind kind = StaircaseKind::Standard,
                   FloorSpec lower_spec = {}, int lower_count = 50) {
  const FloorPlan upper = make_floor(FloorSpec{}, 50, CellKind::StairEntry);
  const FloorPlan lower = make_floor(lower_spec, lower_count, CellKind::Exit);
  return Building::unit_cell(upper, unfold_staircase(kind, stair_length, 1.2), lower);
}

int walkable_in_column(const CellGrid& g, int col) {
  int n = 0;
  for (int r = 0; r < g.height(); ++r) n += is_walkable(g.at({col, r})) ? 1 : 0;
  return n;
}

}  // namespace

TEST(CellGrid, RowsRoundTripTopDown) {
  const std::vector<std::string> rows{"####", "#..E", "#<.#", "####"};
  const CellGrid g = CellGrid::from_rows(rows, 0.3);
  EXPECT_EQ(g.to_rows(), rows);
  EXPECT_EQ(g.at({3, 2}), CellKind::Exit);
  EXPECT_EQ(g.at({1, 1}), CellKind::StairExit);
}

TEST(CellGrid, LocateIsHalfOpen) {
  const CellGrid g(4, 4, 0.5, CellKind::Free);
  EXPECT_EQ(g.locate({0.5, 0.5}), (Cell{1, 1}));
  EXPECT_EQ(g.locate({0.5 - 1e-9, 0.5}), (Cell{0, 1}));
  EXPECT_FALSE(g.locate({2.0, 0.1}).has_value());
  EXPECT_FALSE(g.locate({-1e-12, 0.1}).has_value());
}

TEST(CellGrid, RejectsBadCharacters) {
  EXPECT_THROW(CellGrid::from_rows(std::vector<std::string>{"#x#"}, 0.3), std::invalid_argument);
}

TEST(Staircase, LadderShortIsStraightTwentyByFourCorridor) {
  const Staircase s = unfold_staircase(StaircaseKind::LadderShort, 6.0, 1.2, 0.3);
  EXPECT_EQ(s.unfolded.walkable_count(), 80u);
  EXPECT_EQ(s.unfolded.width(), 20);
  for (int c = 0; c < s.unfolded.width(); ++c) EXPECT_EQ(walkable_in_column(s.unfolded, c), 4);
  EXPECT_DOUBLE_EQ(s.centerline_length(), 6.0);
  EXPECT_DOUBLE_EQ(s.arrival.width(0.3), 1.2);
  EXPECT_DOUBLE_EQ(s.departure.width(0.3), 1.2);
}

TEST(Staircase, LadderLongDiffersOnlyInLength) {
  const Staircase s = unfold_staircase(StaircaseKind::LadderLong, 12.0, 1.2, 0.3);
  EXPECT_EQ(s.unfolded.width(), 40);
  for (int c = 0; c < s.unfolded.width(); ++c) EXPECT_EQ(walkable_in_column(s.unfolded, c), 4);
  EXPECT_DOUBLE_EQ(s.centerline_length(), 12.0);
}

TEST(Staircase, StandardIsSwitchbackWithinFivePercent) {
  const Staircase s = unfold_staircase(StaircaseKind::Standard, 8.0, 1.2, 0.3);
  EXPECT_GE(s.centerline_length(), 7.6);
  EXPECT_LE(s.centerline_length(), 8.4);
  EXPECT_NEAR(s.arrival.width(0.3), 1.2, 0.3);
  EXPECT_NEAR(s.departure.width(0.3), 1.2, 0.3);
  // Both bands open on the same wall: the flights run side by side.
  EXPECT_EQ(s.arrival.side, s.departure.side);
  // Away from the landing, every column crosses both flights, four cells each.
  for (int c = 1; c < 6; ++c) EXPECT_EQ(walkable_in_column(s.unfolded, c), 8);
}

TEST(Staircase, HelicalIsHalfAnnulusWithinFivePercent) {
  const Staircase s = unfold_staircase(StaircaseKind::Helical, 8.0, 1.2, 0.3);
  EXPECT_GE(s.centerline_length(), 7.6);
  EXPECT_LE(s.centerline_length(), 8.4);
  EXPECT_NEAR(s.arrival.width(0.3), 1.2, 0.3);
  EXPECT_NEAR(s.departure.width(0.3), 1.2, 0.3);
  EXPECT_TRUE(validate_grid(s.unfolded, "helical").empty());
}

TEST(Staircase, EveryKindMeetsTolerancesAcrossLengths) {
  for (const auto kind : {StaircaseKind::LadderShort, StaircaseKind::LadderLong,
                          StaircaseKind::Standard, StaircaseKind::Helical}) {
    for (const double length : {6.0, 8.0, 10.0, 12.0}) {
      const Staircase s = unfold_staircase(kind, length, 1.2, 0.3);
      EXPECT_NEAR(s.centerline_length(), length, 0.05 * length) << to_string(kind) << " " << length;
      EXPECT_NEAR(s.arrival.width(0.3), 1.2, 0.3);
      EXPECT_TRUE(validate_grid(s.unfolded, "stair").empty()) << to_string(kind) << " " << length;
    }
  }
}

TEST(Staircase, RejectsChannelNarrowerThanTwoCells) {
  EXPECT_THROW(unfold_staircase(StaircaseKind::LadderShort, 6.0, 0.5, 0.3), std::invalid_argument);
  EXPECT_NO_THROW(unfold_staircase(StaircaseKind::LadderShort, 6.0, 0.6, 0.3));
}

TEST(FloorPlan, ExitWidthMatchesBandCells) {
  const FloorPlan f = make_floor(FloorSpec{}, 10, CellKind::Exit);
  EXPECT_NEAR(f.exit_width_cf, f.departure.count * 0.3, 0.3);
  EXPECT_EQ(f.grid.count(CellKind::Exit), static_cast<std::size_t>(f.departure.count));
  ASSERT_TRUE(f.arrival.has_value());
  EXPECT_EQ(f.grid.count(CellKind::StairExit), static_cast<std::size_t>(f.arrival->count));
}

TEST(Replicate, TwoFloorsIsIdentityInFullStackMode) {
  const Building unit = two_floor();
  const Building two = replicate_unit_cell(unit, 2);
  EXPECT_EQ(two.mode(), BuildingMode::FullStack);
  ASSERT_EQ(two.floor_count(), 2);
  ASSERT_EQ(two.staircase_count(), 1);
  for (int n = 0; n < 2; ++n) EXPECT_EQ(two.floor(n), unit.floor(n));
  EXPECT_EQ(two.staircase(0), unit.staircase(0));
}

TEST(Replicate, FiveFloorsAreTranslationalCopies) {
  const Building b = replicate_unit_cell(two_floor(), 5);
  ASSERT_EQ(b.floor_count(), 5);
  ASSERT_EQ(b.staircase_count(), 4);
  for (int n = 2; n < 5; ++n) EXPECT_EQ(b.floor(n).grid, b.floor(1).grid);
  for (int k = 1; k < 4; ++k) EXPECT_EQ(b.staircase(k), b.staircase(0));
}

TEST(Replicate, UpperFloorsMatchUnitCellForAllCounts) {
  const Building unit = two_floor();
  for (int n = 2; n <= 20; ++n) {
    const Building b = replicate_unit_cell(unit, n);
    ASSERT_EQ(b.floor_count(), n);
    EXPECT_EQ(b.floor(0), unit.floor(0));
    for (int k = 1; k < n; ++k) EXPECT_EQ(b.floor(k).grid, unit.floor(1).grid);
  }
}

TEST(Replicate, RejectsSingleFloor) {
  EXPECT_THROW(replicate_unit_cell(two_floor(), 1), std::invalid_argument);
}

TEST(Validate, WellFormedTwoFloorScenarioIsClean) {
  EXPECT_TRUE(validate_scenario(two_floor(), AgentParams{}).empty());
}

TEST(Validate, SealedExitReportsUnreachableCells) {
  const CellGrid g = test::grid_of({
      "#######",
      "#...#.E",
      "#...###",
      "#######",
  });
  const auto diags = validate_grid(g, "sealed");
  ASSERT_FALSE(diags.empty());
  EXPECT_TRUE(std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.code == "unreachable" && d.message.find("unreachable free cells") != std::string::npos;
  }));
}

TEST(Validate, FiveHundredAgentsOnFiveMetreFloorIsOvercrowded) {
  const Building b = two_floor(8.0, StaircaseKind::Standard, FloorSpec{5.0, 5.0, 1.2}, 500);
  const auto diags = validate_scenario(b, AgentParams{});
  EXPECT_TRUE(std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.code == "overcrowded" &&
           d.message.find("overcrowded initial placement") != std::string::npos;
  }));
}

TEST(Validate, IsPure) {
  const Building b = two_floor(8.0, StaircaseKind::Standard, FloorSpec{5.0, 5.0, 1.2}, 500);
  EXPECT_EQ(validate_scenario(b, AgentParams{}), validate_scenario(b, AgentParams{}));
}

TEST(Validate, OpenBoundaryIsReported) {
  const CellGrid g = test::grid_of({
      "#####",
      "....E",
      "#####",
  });
  const auto diags = validate_grid(g, "open");
  EXPECT_TRUE(std::any_of(diags.begin(), diags.end(),
                          [](const Diagnostic& d) { return d.code == "open-boundary"; }));
}
