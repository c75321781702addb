#pragma once

#include "effdim/gaussian_design.hpp"
#include "effdim/relu_net.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace effdim {

using CellIndex = std::vector<std::int64_t>;

/// Cells of side r on the lattice origin + r Z^d; cell v is
/// origin + r [v, v + 1). Cells are sorted and unique.
struct LatticeCover {
  double r = 1.0;
  Vector origin;
  std::vector<CellIndex> cells;
  /// Empirical mass per cell (fraction of points); empty for geometric covers.
  std::vector<double> mass;

  std::size_t dim() const { return static_cast<std::size_t>(origin.size()); }
  std::size_t size() const { return cells.size(); }
  Vector center(std::size_t k) const;
};

/// Lattice cells (origin 0) containing at least one row of `points` (n x d).
LatticeCover cover_points(const Matrix &points, double r);

/// Every lattice cell meeting S(R, r; p), with Q taken as the identity.
/// Axes i <= p are aligned so [-lambda_i R, lambda_i R] spans exactly
/// ceil(2 lambda_i R / r) cells; a cell is kept when the minimum of
/// sum_{i<=p} z_i^2 / lambda_i^2 over the cell is below R^2. Axes j > p
/// carry the single cell [-r/2, r/2].
LatticeCover cover_ellipsoid_set(const EllipsoidSet &set);

/// prod_{i<=p} lambda_i / lambda_p.
double ellipsoid_product_bound(const EllipsoidSet &set);
/// prod_{i<=p} ceil(2 lambda_i R / r): the number of cells of the bounding box.
double ellipsoid_box_cells(const EllipsoidSet &set);

struct GroupedCover {
  LatticeCover cover;
  /// groups[j] lists indices into cover.cells.
  std::vector<std::vector<std::size_t>> groups;
};

/// Groups by the parity of the lattice index in every coordinate.
GroupedCover group_cells(const LatticeCover &cover);

/// L_inf distance between two closed cells of the cover.
double cell_distance(const LatticeCover &cover, std::size_t a, std::size_t b);

struct EffDimEstimate {
  double r = 0.0;
  double tau = 0.0;
  std::size_t n_cells = 0;
  double p_hat = 0.0;
  double retained_mass = 0.0;
  /// Largest |coordinate| over the retained cells.
  double R_S = 0.0;
  /// Retained cells, sorted, with their empirical mass.
  LatticeCover retained;
};

/// Greedy selection of the heaviest cells until the retained mass reaches
/// 1 - tau. p_hat = log(n_cells) / (-log r).
EffDimEstimate estimate_effective_dim(const Matrix &points, double r, double tau);

/// One row per cell: d integer indices then the mass (empty if geometric).
void write_cover_csv(std::ostream &out, const LatticeCover &cover);

} // namespace effdim
