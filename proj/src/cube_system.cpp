#include "awvd/cube_system.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace awvd {

namespace {

int msb(std::uint64_t x) noexcept { return 63 - std::countl_zero(x); }

void set_bit(MortonKey& key, int pos) noexcept {
  key.words[3 - pos / 64] |= std::uint64_t{1} << (pos % 64);
}

void add_power_of_two(MortonKey& key, int pos) noexcept {
  int w = 3 - pos / 64;
  std::uint64_t add = std::uint64_t{1} << (pos % 64);
  while (w >= 0) {
    const std::uint64_t before = key.words[w];
    key.words[w] += add;
    if (key.words[w] >= before) return;
    add = 1;
    --w;
  }
}

FixedPoint lift(const CanonicalCube& c, int level) noexcept {
  FixedPoint out{};
  for (int k = 0; k < c.dim; ++k) out[k] = c.anchor[k] << (level - c.level);
  return out;
}

}  // namespace

CanonicalCube CanonicalCube::parent() const noexcept {
  CanonicalCube p = *this;
  p.level = level - 1;
  for (int k = 0; k < dim; ++k) p.anchor[k] >>= 1;
  return p;
}

CanonicalCube CanonicalCube::child(int index) const noexcept {
  CanonicalCube c = *this;
  c.level = level + 1;
  for (int k = 0; k < dim; ++k)
    c.anchor[k] = (anchor[k] << 1) | static_cast<std::uint64_t>((index >> (dim - 1 - k)) & 1);
  return c;
}

bool cube_contains(const CanonicalCube& outer, const CanonicalCube& inner) noexcept {
  if (inner.level < outer.level) return false;
  const int shift = inner.level - outer.level;
  for (int k = 0; k < outer.dim; ++k)
    if ((inner.anchor[k] >> shift) != outer.anchor[k]) return false;
  return true;
}

GridConfig GridConfig::unit(int dim, int frac_bits) {
  GridConfig g;
  g.dim = dim;
  g.frac_bits = frac_bits;
  g.offset = Point(dim);
  g.scale = 1.0;
  return g;
}

GridConfig GridConfig::for_sites(const SiteSet& sites, int frac_bits) {
  if (frac_bits < 1 || frac_bits > kMaxFracBits)
    throw Error(ErrorCode::OutOfRange, "frac_bits must lie in [1, 60]");
  const Box bb = sites.bounding_box();
  double diameter = dist(bb.lo, bb.hi);
  if (diameter == 0.0) diameter = 1.0;
  const double side = std::exp2(std::ceil(std::log2(4.0 * diameter)));
  GridConfig g;
  g.dim = sites.dim();
  g.frac_bits = frac_bits;
  g.scale = side;
  g.offset = (bb.lo + bb.hi) * 0.5;
  for (int k = 0; k < g.dim; ++k) g.offset[k] -= 0.5 * side;
  return g;
}

Box GridConfig::root_box() const {
  Box b{offset, offset};
  for (int k = 0; k < dim; ++k) b.hi[k] += scale;
  return b;
}

double GridConfig::side_of(const CanonicalCube& c) const noexcept {
  return std::ldexp(scale, -c.level);
}

Box GridConfig::box_of(const CanonicalCube& c) const {
  const double side = side_of(c);
  Box b{Point(dim), Point(dim)};
  for (int k = 0; k < dim; ++k) {
    b.lo[k] = offset[k] + static_cast<double>(c.anchor[k]) * side;
    b.hi[k] = b.lo[k] + side;
  }
  return b;
}

bool GridConfig::in_root(const Point& p) const noexcept {
  for (int k = 0; k < dim; ++k) {
    const double u = (p[k] - offset[k]) / scale;
    if (!(u >= 0.0 && u < 1.0)) return false;
  }
  return true;
}

FixedPoint GridConfig::to_fixed(const Point& p) const {
  if (p.dim() != dim || !in_root(p)) {
    std::ostringstream os;
    os << "point outside root cube";
    throw Error(ErrorCode::OutOfRoot, os.str());
  }
  return to_fixed_clamped(p);
}

FixedPoint GridConfig::to_fixed_clamped(const Point& p) const noexcept {
  FixedPoint f{};
  const std::uint64_t max_cell = (std::uint64_t{1} << frac_bits) - 1;
  for (int k = 0; k < dim; ++k) {
    const double u = std::ldexp((p[k] - offset[k]) / scale, frac_bits);
    if (!(u > 0.0))
      f[k] = 0;
    else if (u >= static_cast<double>(max_cell))
      f[k] = std::min(max_cell, static_cast<std::uint64_t>(std::floor(u)));
    else
      f[k] = static_cast<std::uint64_t>(std::floor(u));
  }
  return f;
}

CanonicalCube GridConfig::finest_cube(const FixedPoint& f) const noexcept {
  CanonicalCube c;
  c.level = frac_bits;
  c.dim = dim;
  c.anchor = f;
  return c;
}

CanonicalCube GridConfig::root_cube() const noexcept {
  CanonicalCube c;
  c.dim = dim;
  return c;
}

void GridConfig::validate(const CanonicalCube& c) const {
  bool ok = c.dim == dim && c.level >= 0 && c.level <= frac_bits;
  for (int k = 0; ok && k < c.dim; ++k) ok = (c.anchor[k] >> c.level) == 0;
  if (!ok) throw Error(ErrorCode::CubeOutsideRoot, "cube is not a descendant of the root");
}

CanonicalCube cube_containing(const GridConfig& grid, const Point& p, int level) {
  if (level < 0 || level > grid.frac_bits) throw Error(ErrorCode::OutOfRange, "level out of range");
  const FixedPoint f = grid.to_fixed(p);
  CanonicalCube c;
  c.level = level;
  c.dim = grid.dim;
  for (int k = 0; k < grid.dim; ++k) c.anchor[k] = f[k] >> (grid.frac_bits - level);
  return c;
}

CanonicalCube smallest_cube_covering(const GridConfig& grid, const Point& p, const Point& q) {
  return smallest_cube_covering(grid.finest_cube(grid.to_fixed(p)),
                                grid.finest_cube(grid.to_fixed(q)), grid.frac_bits);
}

CanonicalCube smallest_cube_covering(const CanonicalCube& a, const CanonicalCube& b,
                                     int frac_bits) noexcept {
  const FixedPoint fa = lift(a, frac_bits);
  const FixedPoint fb = lift(b, frac_bits);
  std::uint64_t diff = 0;
  for (int k = 0; k < a.dim; ++k) diff |= fa[k] ^ fb[k];
  int level = std::min(a.level, b.level);
  if (diff != 0) level = std::min(level, frac_bits - (msb(diff) + 1));
  CanonicalCube c;
  c.level = level;
  c.dim = a.dim;
  for (int k = 0; k < a.dim; ++k) c.anchor[k] = fa[k] >> (frac_bits - level);
  return c;
}

std::strong_ordering z_compare(const CanonicalCube& a, const CanonicalCube& b) noexcept {
  const int level = std::max(a.level, b.level);
  const FixedPoint fa = lift(a, level);
  const FixedPoint fb = lift(b, level);
  // Axis whose coordinates differ in the most significant bit decides; on
  // equal bit position the earlier axis wins (it is more significant in the
  // interleaving).
  int axis = -1;
  std::uint64_t top = 0;
  for (int k = 0; k < a.dim; ++k) {
    const std::uint64_t x = fa[k] ^ fb[k];
    if (top < x && top < (top ^ x)) {
      top = x;
      axis = k;
    }
  }
  if (axis < 0) return a.level <=> b.level;
  return fa[axis] <=> fb[axis];
}

MortonKey morton_key(const FixedPoint& f, int dim, int frac_bits) noexcept {
  MortonKey key;
  for (int bit = 0; bit < frac_bits; ++bit) {
    for (int k = 0; k < dim; ++k) {
      if ((f[k] >> bit) & 1) set_bit(key, bit * dim + (dim - 1 - k));
    }
  }
  return key;
}

MortonKey morton_begin(const CanonicalCube& c, int frac_bits) noexcept {
  return morton_key(lift(c, frac_bits), c.dim, frac_bits);
}

MortonKey morton_end(const CanonicalCube& c, int frac_bits) noexcept {
  MortonKey key = morton_begin(c, frac_bits);
  add_power_of_two(key, c.dim * (frac_bits - c.level));
  return key;
}

CompressedQuadTree build_compressed_tree(std::vector<LabeledCube> cubes, int dim, int frac_bits,
                                         DuplicatePolicy policy) {
  if (cubes.empty()) throw Error(ErrorCode::EmptyInput, "no cubes");
  if (frac_bits < 1 || frac_bits > kMaxFracBits || dim * frac_bits > 240)
    throw Error(ErrorCode::OutOfRange, "unsupported frac_bits for this dimension");
  const GridConfig frame = GridConfig::unit(dim, frac_bits);
  for (const LabeledCube& lc : cubes) frame.validate(lc.cube);

  std::sort(cubes.begin(), cubes.end(), [](const LabeledCube& a, const LabeledCube& b) {
    const auto ord = z_compare(a.cube, b.cube);
    if (ord != 0) return ord < 0;
    return a.label < b.label;
  });
  std::vector<LabeledCube> unique;
  unique.reserve(cubes.size());
  for (const LabeledCube& lc : cubes) {
    if (!unique.empty() && unique.back().cube == lc.cube) {
      // Sorted by label within equal cubes: the first entry holds the minimum.
      if (policy == DuplicatePolicy::KeepMaxLabel) unique.back().label = lc.label;
      continue;
    }
    unique.push_back(lc);
  }

  struct Proto {
    CanonicalCube cube;
    int label = 0;
    bool from_input = false;
    std::vector<int> children;
  };
  std::vector<Proto> proto;
  proto.reserve(unique.size() * 2);
  std::vector<int> stack;
  int top_root = -1;
  for (const LabeledCube& lc : unique) {
    int popped = -1;
    while (!stack.empty() && !cube_contains(proto[stack.back()].cube, lc.cube)) {
      popped = stack.back();
      stack.pop_back();
    }
    int parent = stack.empty() ? -1 : stack.back();
    if (popped >= 0) {
      const CanonicalCube lca = smallest_cube_covering(proto[popped].cube, lc.cube, frac_bits);
      if (parent < 0 || lca.level > proto[parent].cube.level) {
        const int branch = static_cast<int>(proto.size());
        proto.push_back(Proto{lca, 0, false, {popped}});
        if (parent >= 0)
          proto[parent].children.back() = branch;
        else
          top_root = branch;
        stack.push_back(branch);
        parent = branch;
      }
    }
    const int id = static_cast<int>(proto.size());
    proto.push_back(Proto{lc.cube, lc.label, true, {}});
    if (parent >= 0)
      proto[parent].children.push_back(id);
    else
      top_root = id;
    stack.push_back(id);
  }

  CompressedQuadTree tree;
  tree.dim_ = dim;
  tree.frac_bits_ = frac_bits;
  tree.nodes_.reserve(proto.size());
  // Flatten into pre-order.
  struct Frame {
    int proto_id;
    int parent;
    int depth;
  };
  std::vector<Frame> todo{{top_root, -1, 0}};
  std::vector<int> last_child;
  while (!todo.empty()) {
    const Frame f = todo.back();
    todo.pop_back();
    const int id = static_cast<int>(tree.nodes_.size());
    CompressedQuadTree::Node node;
    node.cube = proto[f.proto_id].cube;
    node.label = proto[f.proto_id].label;
    node.from_input = proto[f.proto_id].from_input;
    node.parent = f.parent;
    node.depth = f.depth;
    tree.nodes_.push_back(node);
    last_child.push_back(-1);
    tree.depth_ = std::max(tree.depth_, f.depth);
    if (f.parent >= 0) {
      if (last_child[f.parent] < 0)
        tree.nodes_[f.parent].first_child = id;
      else
        tree.nodes_[last_child[f.parent]].next_sibling = id;
      last_child[f.parent] = id;
    }
    const auto& kids = proto[f.proto_id].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) todo.push_back({*it, id, f.depth + 1});
  }
  tree.index_cells();
  return tree;
}

void CompressedQuadTree::index_cells() {
  starts_.clear();
  start_nodes_.clear();
  auto emit = [&](const MortonKey& key, int node) {
    if (!starts_.empty() && starts_.back() == key) {
      start_nodes_.back() = node;
      return;
    }
    starts_.push_back(key);
    start_nodes_.push_back(node);
  };
  root_end_ = morton_end(nodes_[0].cube, frac_bits_);
  emit(morton_begin(nodes_[0].cube, frac_bits_), 0);
  // (node, next child to visit)
  std::vector<std::pair<int, int>> stack{{0, nodes_[0].first_child}};
  while (!stack.empty()) {
    const auto [node, child] = stack.back();
    if (child < 0) {
      stack.pop_back();
      if (!stack.empty()) {
        const int parent = stack.back().first;
        const MortonKey end = morton_end(nodes_[node].cube, frac_bits_);
        if (end < morton_end(nodes_[parent].cube, frac_bits_)) emit(end, parent);
      }
      continue;
    }
    stack.back().second = nodes_[child].next_sibling;
    emit(morton_begin(nodes_[child].cube, frac_bits_), child);
    stack.emplace_back(child, nodes_[child].first_child);
  }
}

CompressedQuadTree::Location CompressedQuadTree::locate(const FixedPoint& f) const noexcept {
  Location loc;
  const MortonKey key = morton_key(f, dim_, frac_bits_);
  // Last interval start <= key.
  std::size_t lo = 0;
  std::size_t hi = starts_.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    ++loc.comparisons;
    if (starts_[mid] <= key)
      lo = mid + 1;
    else
      hi = mid;
  }
  ++loc.comparisons;
  if (lo == 0 || !(key < root_end_)) return loc;
  loc.node = start_nodes_[lo - 1];
  loc.label = nodes_[loc.node].label;
  return loc;
}

CompressedQuadTree::Location CompressedQuadTree::locate_linear(const FixedPoint& f) const noexcept {
  Location loc;
  CanonicalCube point_cube;
  point_cube.level = frac_bits_;
  point_cube.dim = dim_;
  point_cube.anchor = f;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    ++loc.comparisons;
    if (cube_contains(nodes_[k].cube, point_cube) &&
        (loc.node < 0 || nodes_[k].cube.level > nodes_[loc.node].cube.level))
      loc.node = static_cast<int>(k);
  }
  if (loc.node >= 0) loc.label = nodes_[loc.node].label;
  return loc;
}

void CompressedQuadTree::propagate(int root_label) noexcept {
  // Pre-order guarantees parents are finalized before their children.
  for (Node& n : nodes_) {
    const int parent_label = n.parent < 0 ? root_label : nodes_[n.parent].label;
    if (n.label == 0 || n.label > parent_label) n.label = parent_label;
  }
}

CompressedQuadTree propagate_labels(CompressedQuadTree tree, int root_label) {
  tree.propagate(root_label);
  return tree;
}

PointLocation point_locate(const CompressedQuadTree& tree, const GridConfig& grid, const Point& p) {
  const auto loc = tree.locate(grid.to_fixed(p));
  return {loc.label, loc.node, loc.comparisons};
}

}  // namespace awvd
