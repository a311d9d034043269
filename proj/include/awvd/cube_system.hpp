#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

#include "awvd/geom_core.hpp"

namespace awvd {

inline constexpr int kMaxFracBits = 60;

using FixedPoint = std::array<std::uint64_t, kMaxDim>;

/// A dyadic cube of the canonical system: side 2^-level of the root,
/// anchor[k] in [0, 2^level). Level 0 is the root cube.
struct CanonicalCube {
  int level = 0;
  int dim = 0;
  FixedPoint anchor{};

  friend bool operator==(const CanonicalCube& a, const CanonicalCube& b) noexcept {
    if (a.level != b.level || a.dim != b.dim) return false;
    for (int k = 0; k < a.dim; ++k)
      if (a.anchor[k] != b.anchor[k]) return false;
    return true;
  }

  CanonicalCube parent() const noexcept;
  /// Children are numbered by their anchor parity bits, first axis most significant.
  CanonicalCube child(int index) const noexcept;
  int child_count() const noexcept { return 1 << dim; }
};

/// True iff `inner` is `outer` or one of its descendants.
bool cube_contains(const CanonicalCube& outer, const CanonicalCube& inner) noexcept;

/// Affine frame mapping instance coordinates onto the root cube [0,1)^d,
/// plus the fixed-point resolution B (`frac_bits`).
struct GridConfig {
  int dim = 0;
  int frac_bits = 48;
  Point offset;
  double scale = 1.0;

  /// Root is [0,1)^d itself.
  static GridConfig unit(int dim, int frac_bits = 48);
  /// Smallest power-of-two root whose side is at least four times the site
  /// bounding-box diameter, centered on the bounding box.
  static GridConfig for_sites(const SiteSet& sites, int frac_bits = 48);

  Box root_box() const;
  Box box_of(const CanonicalCube& c) const;
  double side_of(const CanonicalCube& c) const noexcept;
  bool in_root(const Point& p) const noexcept;
  /// Throws OutOfRoot outside the half-open root cube.
  FixedPoint to_fixed(const Point& p) const;
  /// Same, but clamps outside points onto the root boundary.
  FixedPoint to_fixed_clamped(const Point& p) const noexcept;
  /// Root-level cube at level B holding the fixed-point position.
  CanonicalCube finest_cube(const FixedPoint& f) const noexcept;
  CanonicalCube root_cube() const noexcept;
  void validate(const CanonicalCube& c) const;
};

CanonicalCube cube_containing(const GridConfig& grid, const Point& p, int level);
CanonicalCube smallest_cube_covering(const GridConfig& grid, const Point& p, const Point& q);
/// Lowest common ancestor cube of two cubes; `frac_bits` bounds the levels.
CanonicalCube smallest_cube_covering(const CanonicalCube& a, const CanonicalCube& b,
                                     int frac_bits) noexcept;

/// DFS pre-order over canonical cubes: ancestors first, disjoint cubes by
/// bit-interleaved anchors lifted to the finer level.
std::strong_ordering z_compare(const CanonicalCube& a, const CanonicalCube& b) noexcept;

/// Interleaved (Morton) code of a level-B position, big-endian words.
struct MortonKey {
  std::array<std::uint64_t, 4> words{};
  friend auto operator<=>(const MortonKey&, const MortonKey&) = default;
};

MortonKey morton_key(const FixedPoint& f, int dim, int frac_bits) noexcept;
/// First level-B code inside the cube.
MortonKey morton_begin(const CanonicalCube& c, int frac_bits) noexcept;
/// One past the last level-B code inside the cube.
MortonKey morton_end(const CanonicalCube& c, int frac_bits) noexcept;

struct LabeledCube {
  CanonicalCube cube;
  int label = 0;  // 0 = unlabeled
};

enum class DuplicatePolicy {
  KeepMinLabel,
  KeepMaxLabel,  // fault injection only
};

/// Compressed quadtree over canonical cubes. Nodes are stored in DFS
/// pre-order; node 0 is the root. Each node's cell is its cube minus the
/// cubes of its children.
class CompressedQuadTree {
 public:
  struct Node {
    CanonicalCube cube;
    int label = 0;
    int parent = -1;
    int first_child = -1;
    int next_sibling = -1;
    int depth = 0;
    bool from_input = false;
  };

  struct Location {
    int label = 0;
    int node = -1;
    int comparisons = 0;
  };

  CompressedQuadTree() = default;

  int dim() const noexcept { return dim_; }
  int frac_bits() const noexcept { return frac_bits_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  int depth() const noexcept { return depth_; }
  /// Number of z-order intervals in the point-location index.
  int interval_count() const noexcept { return static_cast<int>(starts_.size()); }

  /// Smallest node cell containing the level-B position; binary search over
  /// the z-ordered cell intervals. `node == -1` when outside the tree root.
  Location locate(const FixedPoint& f) const noexcept;
  /// Reference answer: deepest node containing the position, by linear scan.
  Location locate_linear(const FixedPoint& f) const noexcept;

  void set_label(int node, int label) noexcept { nodes_[node].label = label; }
  void propagate(int root_label) noexcept;

  friend CompressedQuadTree build_compressed_tree(std::vector<LabeledCube> cubes, int dim,
                                                  int frac_bits, DuplicatePolicy policy);

 private:
  void index_cells();

  std::vector<Node> nodes_;
  std::vector<MortonKey> starts_;
  std::vector<int> start_nodes_;
  MortonKey root_end_{};
  int dim_ = 0;
  int frac_bits_ = 0;
  int depth_ = 0;
};

/// Sorts by z-order, removes duplicate cubes (minimum label wins by default),
/// and links the cubes into a compressed quadtree. Throws CubeOutsideRoot.
CompressedQuadTree build_compressed_tree(std::vector<LabeledCube> cubes, int dim, int frac_bits,
                                         DuplicatePolicy policy = DuplicatePolicy::KeepMinLabel);

/// Top-down pass: a node that is unlabeled or carries a larger label than
/// its parent takes the parent's label. The root's virtual parent is `root_label`.
CompressedQuadTree propagate_labels(CompressedQuadTree tree, int root_label);

struct PointLocation {
  int label = 0;
  int node = -1;
  int comparisons = 0;
};

/// Throws OutOfRoot when p lies outside the grid's root cube.
PointLocation point_locate(const CompressedQuadTree& tree, const GridConfig& grid, const Point& p);

}  // namespace awvd
