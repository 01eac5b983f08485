#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace hdiv_afem;
using testing_support::max_cells_across_edge;

namespace {

int count_faces(const Mesh &m, FaceKind kind)
{
  int n = 0;
  for (const Face &f : m.faces())
    n += f.kind == kind;
  return n;
}

double active_area(const Mesh &m)
{
  double a = 0.0;
  for (CellId id : m.active_cells())
    a += m.cell(id).area();
  return a;
}

bool contains(const Rect &outer, const Rect &inner)
{
  return inner.x0 >= outer.x0 - 1e-14 && inner.x1 <= outer.x1 + 1e-14 && inner.y0 >= outer.y0 - 1e-14 &&
         inner.y1 <= outer.y1 + 1e-14;
}

} // namespace

TEST(Mesh, UnitSquareHasFourBoundaryFaces)
{
  const Mesh m = Mesh::build_initial({{0, 0, 1, 1}});
  EXPECT_EQ(m.n_active(), 1);
  EXPECT_EQ(count_faces(m, FaceKind::interior), 0);
  EXPECT_EQ(count_faces(m, FaceKind::boundary), 4);
}

TEST(Mesh, LShapeHasTwoInteriorFaces)
{
  const Mesh m = Mesh::build_initial(lshape_cells());
  EXPECT_EQ(m.n_active(), 3);
  EXPECT_EQ(count_faces(m, FaceKind::interior), 2);
  EXPECT_EQ(count_faces(m, FaceKind::boundary), 8);
  EXPECT_DOUBLE_EQ(m.domain_area(), 3.0);
}

TEST(Mesh, InvalidInitialPartitionsAreRejected)
{
  // overlap
  EXPECT_THROW(Mesh::build_initial({{0, 0, 1, 1}, {0.5, 0, 1.5, 1}}), Error);
  // edge mismatch: a shared edge covered only in part
  EXPECT_THROW(Mesh::build_initial({{0, 0, 1, 1}, {1, 0.5, 2, 1.5}}), Error);
  // degenerate rectangle
  EXPECT_THROW(Mesh::build_initial({{0, 0, 0, 1}}), Error);
  try
  {
    Mesh::build_initial({{0, 0, 1, 1}, {0.2, 0.2, 0.8, 0.8}});
    FAIL() << "overlap not detected";
  }
  catch (const Error &e)
  {
    EXPECT_NE(std::string(e.what()).find('0'), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
  }
}

TEST(Mesh, RefiningTheUnitSquareGivesQuarterCells)
{
  const Mesh m = Mesh::build_initial({{0, 0, 1, 1}});
  const std::vector<CellId> mark{0};
  const auto r = refine(m, mark);
  ASSERT_EQ(r.mesh.n_active(), 4);
  for (CellId id : r.mesh.active_cells())
    EXPECT_DOUBLE_EQ(r.mesh.cell(id).h(), 0.5);
  EXPECT_EQ(r.refined, mark);
}

TEST(Mesh, EmptyMarkingLeavesTheMeshUnchanged)
{
  const Mesh m = Mesh::build_initial(lshape_cells());
  const auto r = refine(m, std::vector<CellId>{});
  std::ostringstream a, b;
  m.write(a);
  r.mesh.write(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_TRUE(r.refined.empty());
}

TEST(Mesh, InactiveCellCannotBeMarked)
{
  const Mesh m = Mesh::build_initial({{0, 0, 1, 1}});
  const Mesh fine = refine(m, std::vector<CellId>{0}).mesh;
  EXPECT_THROW(refine(fine, std::vector<CellId>{0}), Error);
}

TEST(Mesh, RepeatedRefinementTriggersClosure)
{
  Mesh m = Mesh::build_initial(grid_cells({0, 0, 1, 1}, 2, 2));
  m = refine(m, std::vector<CellId>{0}).mesh;
  // the child of cell 0 at the shared corner with cell 1
  const CellId child = m.locate({0.4, 0.1});
  const auto r = refine(m, std::vector<CellId>{child});
  EXPECT_LE(max_cells_across_edge(r.mesh), 2);
  EXPECT_GT(r.refined.size(), 1u);
  EXPECT_FALSE(r.mesh.is_active(1));
}

TEST(Mesh, PatchSizes)
{
  const Mesh m3 = Mesh::build_initial(grid_cells({0, 0, 3, 3}, 3, 3));
  EXPECT_EQ(m3.patch(m3.locate({1.5, 1.5})).size(), 5u);
  const Mesh m2 = Mesh::build_initial(grid_cells({0, 0, 2, 2}, 2, 2));
  EXPECT_EQ(m2.patch(0).size(), 3u);

  const Mesh r = refine(m2, std::vector<CellId>{1}).mesh;
  const auto p = r.patch(0);
  EXPECT_EQ(p.size(), 4u); // self, two fine cells across the right edge, the cell above
  EXPECT_TRUE(std::count(p.begin(), p.end(), r.locate({1.2, 0.2})));
  EXPECT_TRUE(std::count(p.begin(), p.end(), r.locate({1.2, 0.8})));
}

TEST(Mesh, IrregularFaceSizeComesFromTheRefinedSide)
{
  const Mesh m = refine(Mesh::build_initial(grid_cells({0, 0, 2, 1}, 2, 1)), std::vector<CellId>{1}).mesh;
  int irregular = 0;
  for (const Face &f : m.faces())
    if (f.kind == FaceKind::irregular)
    {
      ++irregular;
      EXPECT_DOUBLE_EQ(f.h, 0.5);
    }
  EXPECT_EQ(irregular, 1);
  for (const SubFace &s : m.sub_faces())
    if (!s.is_boundary() && s.position == 1.0)
    {
      const Cell &a = m.cell(s.first), &b = m.cell(s.second);
      EXPECT_DOUBLE_EQ(s.h, std::min(a.width(), b.width()));
    }
}

TEST(Mesh, RandomMarkingPreservesInvariants)
{
  std::mt19937 rng(7);
  for (int run = 0; run < 10; ++run)
  {
    Mesh m = Mesh::build_initial(lshape_cells());
    for (int step = 0; step < 12; ++step)
    {
      std::vector<CellId> marked;
      std::bernoulli_distribution pick(0.2);
      for (CellId id : m.active_cells())
        if (pick(rng))
          marked.push_back(id);
      const Mesh next = refine(m, marked).mesh;
      ASSERT_LE(max_cells_across_edge(next), 2);
      ASSERT_TRUE(is_one_irregular(next));
      ASSERT_NEAR(active_area(next), next.domain_area(), 1e-12 * next.domain_area());
      for (CellId id : next.active_cells())
      {
        int parents = 0;
        for (CellId old : m.active_cells())
          parents += contains(m.cell(old).bounds, next.cell(id).bounds);
        ASSERT_EQ(parents, 1);
      }
      m = next;
    }
  }
}

TEST(Mesh, ClosureIsNeededForOneIrregularity)
{
  Mesh m = Mesh::build_initial(grid_cells({0, 0, 1, 1}, 2, 2));
  m = refine(m, std::vector<CellId>{0}, Closure::none).mesh;
  m = refine(m, std::vector<CellId>{m.locate({0.4, 0.1})}, Closure::none).mesh;
  EXPECT_GT(max_cells_across_edge(m), 2);
  EXPECT_FALSE(is_one_irregular(m));
}

TEST(Mesh, WriteReadRoundTrip)
{
  Mesh m = Mesh::build_initial(lshape_cells());
  for (int k = 0; k < 3; ++k)
    m = refine(m, std::vector<CellId>{m.locate({-1e-3, -1e-3})}).mesh;
  std::stringstream s;
  m.write(s);
  const Mesh back = Mesh::read(s);
  std::ostringstream a, b;
  m.write(a);
  back.write(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.faces().size(), m.faces().size());
}
