#include "homog/cell_geometry.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {

namespace {

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

UnitCell::UnitCell(int dim, int n, std::vector<Phase> phase, double lambda_sq, double gamma)
    : dim_(dim), n_(n), phase_(std::move(phase)), lambda_sq_(lambda_sq), gamma_(gamma) {
  if (dim != 2 && dim != 3) throw GeometryError("cell dimension must be 2 or 3");
  if (n < 2) throw GeometryError("cell resolution must be at least 2 voxels per axis");
  if (phase_.size() != ipow(n, dim))
    throw GeometryError("phase array has " + std::to_string(phase_.size()) + " entries, expected n^dim");
  if (!(lambda_sq > 0)) throw GeometryError("lambda_sq must be positive");
  if (!(gamma >= 0)) throw GeometryError("gamma must be non-negative");
  for (Phase p : phase_) pore_count_ += (p == Phase::pore);
  if (pore_count_ == 0) throw GeometryError("pore phase is empty");

  std::uint64_t h = 14695981039346656037ull;
  h = fnv1a(h, &dim_, sizeof dim_);
  h = fnv1a(h, &n_, sizeof n_);
  h = fnv1a(h, phase_.data(), phase_.size());
  h = fnv1a(h, &lambda_sq_, sizeof lambda_sq_);
  h = fnv1a(h, &gamma_, sizeof gamma_);
  fingerprint_ = h;
}

std::size_t UnitCell::index(std::array<int, 3> ijk) const noexcept {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int a = 0; a < dim_; ++a) {
    int i = ijk[a] % n_;
    if (i < 0) i += n_;
    idx += stride * static_cast<std::size_t>(i);
    stride *= static_cast<std::size_t>(n_);
  }
  return idx;
}

std::array<int, 3> UnitCell::coords(std::size_t voxel) const noexcept {
  std::array<int, 3> ijk{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    ijk[a] = static_cast<int>(voxel % static_cast<std::size_t>(n_));
    voxel /= static_cast<std::size_t>(n_);
  }
  return ijk;
}

UnitCell UnitCell::with_permittivity(double lambda_sq, double gamma) const {
  return UnitCell(dim_, n_, phase_, lambda_sq, gamma);
}

double Nondimensionalization::debye_length() const {
  return std::sqrt(eps_pore * R * T / (2.0 * z_plus * z_plus * e * F * c_bar));
}

namespace {

UnitCell build_channel(const ChannelShape& shape, const CellSpec& spec) {
  if (!(shape.porosity > 0.0 && shape.porosity <= 1.0))
    throw GeometryError("channel porosity must lie in (0, 1]");
  const int n = spec.n;
  if (n < 2) throw GeometryError("cell resolution must be at least 2 voxels per axis");
  const int pore_layers = static_cast<int>(std::lround(shape.porosity * n));
  if (pore_layers <= 0) throw GeometryError("pore phase is empty at this resolution");
  const int first = (n - pore_layers) / 2;
  const std::size_t total = ipow(n, spec.dim);
  std::vector<Phase> phase(total, Phase::solid);
  for (std::size_t v = 0; v < total; ++v) {
    const int j = static_cast<int>((v / static_cast<std::size_t>(n)) % static_cast<std::size_t>(n));
    if (j >= first && j < first + pore_layers) phase[v] = Phase::pore;
  }
  return UnitCell(spec.dim, n, std::move(phase), spec.lambda_sq, spec.gamma);
}

UnitCell build_inclusion(const InclusionShape& shape, const CellSpec& spec) {
  std::vector<double> sides = shape.sides;
  if (sides.size() == 1) sides.assign(static_cast<std::size_t>(spec.dim), sides.front());
  if (sides.size() != static_cast<std::size_t>(spec.dim))
    throw GeometryError("inclusion needs one side length per axis");
  for (double s : sides)
    if (!(s >= 0.0 && s <= 1.0)) throw GeometryError("inclusion side lengths must lie in [0, 1]");
  const int n = spec.n;
  if (n < 2) throw GeometryError("cell resolution must be at least 2 voxels per axis");
  const std::size_t total = ipow(n, spec.dim);
  std::vector<Phase> phase(total, Phase::pore);
  for (std::size_t v = 0; v < total; ++v) {
    std::size_t rest = v;
    bool inside = true;
    for (int a = 0; a < spec.dim; ++a) {
      const int i = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
      const double centre = (i + 0.5) / n;
      if (!(std::abs(centre - 0.5) < 0.5 * sides[a] - 1e-12)) inside = false;
    }
    if (inside) phase[v] = Phase::solid;
  }
  return UnitCell(spec.dim, n, std::move(phase), spec.lambda_sq, spec.gamma);
}

UnitCell build_bitmap(const BitmapShape& shape, const CellSpec& spec) {
  if (spec.dim != 2) throw GeometryError("bitmap cells are 2D only");
  std::ifstream in(shape.file);
  if (!in) throw GeometryError("cannot open bitmap file " + shape.file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_bitmap(buf.str(), spec.lambda_sq, spec.gamma);
}

}  // namespace

UnitCell build_cell(const CellSpec& spec) {
  if (spec.n <= 0 && !std::holds_alternative<BitmapShape>(spec.shape))
    throw GeometryError("cell resolution must be positive");
  return std::visit(
      [&](const auto& shape) -> UnitCell {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, ChannelShape>) return build_channel(shape, spec);
        else if constexpr (std::is_same_v<T, InclusionShape>) return build_inclusion(shape, spec);
        else return build_bitmap(shape, spec);
      },
      spec.shape);
}

UnitCell parse_bitmap(std::string_view text, double lambda_sq, double gamma) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string digits;
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      digits.push_back(c);
    }
    if (!digits.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw GeometryError("malformed bitmap: no data");

  // Optional PBM header: "P1" followed by width and height, possibly on later lines.
  std::vector<char> cells;
  int width = -1;
  int height = -1;
  std::size_t first_row = 0;
  {
    std::istringstream head(rows.front());
    std::string magic;
    head >> magic;
    if (magic == "P1") {
      std::string all;
      for (const auto& r : rows) all += r + "\n";
      std::istringstream tok(all);
      tok >> magic;
      if (!(tok >> width >> height)) throw GeometryError("malformed bitmap: bad P1 header");
      char c;
      while (tok >> c) {
        if (c != '0' && c != '1') throw GeometryError(std::string("malformed bitmap: unexpected character '") + c + "'");
        cells.push_back(c);
      }
      if (cells.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw GeometryError("malformed bitmap: pixel count does not match header");
      first_row = rows.size();
    }
  }
  if (first_row == 0) {
    height = static_cast<int>(rows.size());
    for (const auto& r : rows) {
      int count = 0;
      for (char c : r) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c != '0' && c != '1') throw GeometryError(std::string("malformed bitmap: unexpected character '") + c + "'");
        cells.push_back(c);
        ++count;
      }
      if (width < 0) width = count;
      if (count != width) throw GeometryError("malformed bitmap: ragged rows");
    }
  }
  if (width != height) throw GeometryError("malformed bitmap: grid must be square");
  const int n = width;
  if (n < 2) throw GeometryError("malformed bitmap: need at least 2x2 pixels");

  std::vector<Phase> phase(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    const int j = n - 1 - r;
    for (int i = 0; i < n; ++i) {
      const char c = cells[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
      phase[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * static_cast<std::size_t>(j)] =
          (c == '1') ? Phase::solid : Phase::pore;
    }
  }
  return UnitCell(2, n, std::move(phase), lambda_sq, gamma);
}

double porosity(const UnitCell& cell) {
  return static_cast<double>(cell.pore_count()) / static_cast<double>(cell.num_voxels());
}

std::vector<InterfaceFace> interface_faces(const UnitCell& cell) {
  std::vector<InterfaceFace> faces;
  const int n = cell.n();
  const double area = std::pow(cell.h(), cell.dim() - 1);
  for (std::size_t v = 0; v < cell.num_voxels(); ++v) {
    const auto ijk = cell.coords(v);
    for (int a = 0; a < cell.dim(); ++a) {
      auto nb = ijk;
      nb[a] += 1;
      const std::size_t w = cell.index(nb);
      if (cell.phase(v) == cell.phase(w)) continue;
      InterfaceFace f;
      for (int b = 0; b < cell.dim(); ++b) f.midpoint[b] = (ijk[b] + 0.5) / n;
      f.midpoint[a] = static_cast<double>(ijk[a] + 1) / n;
      f.area = area;
      f.axis = a;
      f.pore_voxel = cell.is_pore(v) ? v : w;
      f.solid_voxel = cell.is_pore(v) ? w : v;
      faces.push_back(f);
    }
  }
  return faces;
}

double interface_measure(const UnitCell& cell) {
  std::size_t count = 0;
  for (std::size_t v = 0; v < cell.num_voxels(); ++v) {
    const auto ijk = cell.coords(v);
    for (int a = 0; a < cell.dim(); ++a) {
      auto nb = ijk;
      nb[a] += 1;
      if (cell.phase(v) != cell.phase(cell.index(nb))) ++count;
    }
  }
  return static_cast<double>(count) * std::pow(cell.h(), cell.dim() - 1);
}

}  // namespace homog
