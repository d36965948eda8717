#include "amrckpt/checkpoint.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "amrckpt/errors.hpp"

namespace amrckpt {

static_assert(std::endian::native == std::endian::little, "FLXC I/O assumes a little-endian host");

namespace {

constexpr std::array<std::string_view, 11> kRealNames = {"time",  "dt",  "xmin",          "xmax",
                                                         "ymin",  "ymax", "gamma",        "cfl",
                                                         "refine_thresh", "derefine_thresh", "refine_filter"};
constexpr std::array<std::string_view, 13> kIntNames = {
    "step",    "checkpoint_num", "nblocks", "nparticles", "source_rep",      "base_nx",     "base_ny",
    "max_level", "nxb",          "nyb",     "refine_interval", "refine_vars", "buffer_cells"};

constexpr std::uint64_t kDoubleBytes = 8;

std::array<double, kRealNames.size()> real_values(const CheckpointSnapshot& s) {
  return {s.time,          s.dt,          s.domain.xlo, s.domain.xhi, s.domain.ylo,
          s.domain.yhi,    s.gamma,       s.cfl,        s.refine.refine_thresh,
          s.refine.derefine_thresh, s.refine.filter};
}

std::int64_t var_mask(const std::vector<Var>& vars) {
  std::int64_t m = 0;
  for (Var v : vars) m |= std::int64_t{1} << idx(v);
  return m;
}

std::array<std::int64_t, kIntNames.size()> int_values(const CheckpointSnapshot& s) {
  return {s.step,
          s.checkpoint_number,
          static_cast<std::int64_t>(s.nblocks()),
          static_cast<std::int64_t>(s.nparticles()),
          static_cast<std::int64_t>(s.source_rep),
          s.domain.base_nx,
          s.domain.base_ny,
          s.domain.max_level,
          kNxb,
          kNyb,
          s.refine_interval,
          var_mask(s.refine.vars),
          s.refine.buffer_cells};
}

std::vector<std::uint8_t> fixed_width(std::span<const std::string_view> names, std::size_t width,
                                      const char* what) {
  std::vector<std::uint8_t> out(names.size() * width, 0);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].size() > width) {
      throw PreconditionError(std::string(what) + " '" + std::string(names[i]) + "' longer than " +
                              std::to_string(width) + " bytes");
    }
    std::memcpy(out.data() + i * width, names[i].data(), names[i].size());
  }
  return out;
}

std::string unknown_section(const std::string& var) { return "unknowns/" + var; }

SectionEntry entry(std::string name, DType dt, std::initializer_list<std::uint64_t> dims) {
  SectionEntry e;
  e.name = std::move(name);
  e.dtype = dt;
  e.rank = static_cast<std::uint32_t>(dims.size());
  std::uint64_t n = 1;
  std::size_t k = 0;
  for (auto d : dims) {
    e.dims[k++] = d;
    n *= d;
  }
  e.nbytes = n * (dt == DType::Utf8 ? 1 : kDoubleBytes);
  return e;
}

std::vector<SectionEntry> section_list(std::size_t nb, std::size_t np, const std::vector<std::string>& varnames) {
  std::vector<SectionEntry> s;
  s.push_back(entry("scalars.real", DType::F64, {kRealNames.size()}));
  s.push_back(entry("scalars.int", DType::I64, {kIntNames.size()}));
  s.push_back(entry("scalars.realnm", DType::Utf8, {kRealNames.size(), kScalarNameBytes}));
  s.push_back(entry("scalars.intnm", DType::Utf8, {kIntNames.size(), kScalarNameBytes}));
  s.push_back(entry("varnames", DType::Utf8, {varnames.size(), kVarNameBytes}));
  s.push_back(entry("lrefine", DType::I64, {nb}));
  s.push_back(entry("bnd_box", DType::F64, {nb, 2, 2}));
  s.push_back(entry("coord", DType::F64, {nb, 2}));
  for (const auto& v : varnames) s.push_back(entry(unknown_section(v), DType::F64, {nb, kNyb, kNxb}));
  for (const char* p : {"part/posx", "part/posy", "part/ptemp", "part/pdens"}) {
    s.push_back(entry(p, DType::F64, {np}));
  }
  s.push_back(entry("part/cpu", DType::I64, {np}));
  s.push_back(entry("part/tag", DType::I64, {np}));
  return s;
}

ContainerLayout place(std::vector<SectionEntry> sections) {
  ContainerLayout layout;
  layout.sections = std::move(sections);
  std::uint64_t off = layout.table_end();
  std::uint64_t total = 0;
  for (auto& s : layout.sections) total += s.nbytes;
  if (total % 8 != 0) {
    SectionEntry pad = entry("_pad", DType::Utf8, {8 - total % 8});
    layout.sections.push_back(pad);
    off = layout.table_end();
  }
  for (auto& s : layout.sections) {
    s.offset = off;
    off += s.nbytes;
  }
  return layout;
}

// Byte payload of every section, in layout order; small sections are owned.
struct Payloads {
  std::array<double, kRealNames.size()> reals{};
  std::array<std::int64_t, kIntNames.size()> ints{};
  std::vector<std::uint8_t> realnm, intnm, varnames;
  std::vector<std::span<const std::uint8_t>> spans;
};

template <typename T>
std::span<const std::uint8_t> bytes_of(const T* p, std::size_t n) {
  return {reinterpret_cast<const std::uint8_t*>(p), n * sizeof(T)};
}

void build_payloads(const CheckpointSnapshot& s, const ContainerLayout& layout, Payloads& p) {
  p.reals = real_values(s);
  p.ints = int_values(s);
  p.realnm = fixed_width(kRealNames, kScalarNameBytes, "scalar name");
  p.intnm = fixed_width(kIntNames, kScalarNameBytes, "scalar name");
  std::vector<std::string_view> vn(s.varnames.begin(), s.varnames.end());
  p.varnames = fixed_width(vn, kVarNameBytes, "variable name");
  static const std::uint8_t zeros[8] = {};
  p.spans.clear();
  std::size_t var = 0;
  for (const auto& e : layout.sections) {
    std::span<const std::uint8_t> b;
    if (e.name == "scalars.real") b = bytes_of(p.reals.data(), p.reals.size());
    else if (e.name == "scalars.int") b = bytes_of(p.ints.data(), p.ints.size());
    else if (e.name == "scalars.realnm") b = p.realnm;
    else if (e.name == "scalars.intnm") b = p.intnm;
    else if (e.name == "varnames") b = p.varnames;
    else if (e.name == "lrefine") b = bytes_of(s.lrefine.data(), s.lrefine.size());
    else if (e.name == "bnd_box") b = bytes_of(s.bnd_box.data(), s.bnd_box.size());
    else if (e.name == "coord") b = bytes_of(s.coord.data(), s.coord.size());
    else if (e.name.rfind("unknowns/", 0) == 0) {
      b = bytes_of(s.unknowns[var].data(), s.unknowns[var].size());
      ++var;
    }
    else if (e.name == "part/posx") b = bytes_of(s.posx.data(), s.posx.size());
    else if (e.name == "part/posy") b = bytes_of(s.posy.data(), s.posy.size());
    else if (e.name == "part/ptemp") b = bytes_of(s.ptemp.data(), s.ptemp.size());
    else if (e.name == "part/pdens") b = bytes_of(s.pdens.data(), s.pdens.size());
    else if (e.name == "part/cpu") b = bytes_of(s.cpu.data(), s.cpu.size());
    else if (e.name == "part/tag") b = bytes_of(s.tag.data(), s.tag.size());
    else if (e.name == "_pad") b = std::span<const std::uint8_t>(zeros, e.nbytes);
    if (b.size() != e.nbytes) throw InvariantError("payload size mismatch in section " + e.name);
    p.spans.push_back(b);
  }
}

void put_u32(std::uint8_t* p, std::uint32_t v) { std::memcpy(p, &v, 4); }
void put_u64(std::uint8_t* p, std::uint64_t v) { std::memcpy(p, &v, 8); }
std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}
std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return v;
}

std::vector<std::uint8_t> header_and_table(const ContainerLayout& layout) {
  std::vector<std::uint8_t> out(layout.table_end(), 0);
  std::memcpy(out.data(), kFlxcMagic, 4);
  put_u32(out.data() + 4, kFlxcVersion);
  put_u64(out.data() + 8, layout.sections.size());
  std::uint8_t* t = out.data() + kHeaderBytes;
  for (const auto& e : layout.sections) {
    if (e.name.size() > kSectionNameBytes) throw PreconditionError("section name too long: " + e.name);
    std::memcpy(t, e.name.data(), e.name.size());
    put_u32(t + 16, static_cast<std::uint32_t>(e.dtype));
    put_u32(t + 20, e.rank);
    for (int k = 0; k < 4; ++k) put_u64(t + 24 + 8 * k, e.dims[static_cast<std::size_t>(k)]);
    put_u64(t + 56, e.offset);
    put_u64(t + 64, e.nbytes);
    t += kTableEntryBytes;
  }
  return out;
}

std::string trim_nul(const std::uint8_t* p, std::size_t n) {
  std::size_t len = 0;
  while (len < n && p[len] != 0) ++len;
  return std::string(reinterpret_cast<const char*>(p), len);
}

std::vector<std::string> fixed_width_names(std::span<const std::uint8_t> b, std::size_t width) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + width <= b.size(); i += width) out.push_back(trim_nul(b.data() + i, width));
  return out;
}

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  throw IoError(path + ": " + what + ": " + std::strerror(errno));
}

void pwrite_all(int fd, const std::string& path, std::span<const std::uint8_t> b, std::uint64_t off) {
  std::size_t done = 0;
  while (done < b.size()) {
    const ssize_t n = ::pwrite(fd, b.data() + done, b.size() - done, static_cast<off_t>(off + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail(path, "write failed");
    }
    done += static_cast<std::size_t>(n);
  }
}

// Open temporary sibling of `path`, removed again unless committed.
class TempFile {
 public:
  explicit TempFile(const std::string& path) : path_(path), tmp_(path + ".part") {
    fd_ = ::open(tmp_.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd_ < 0) io_fail(path_, "cannot create file");
  }
  ~TempFile() {
    if (fd_ >= 0) ::close(fd_);
    if (!committed_) ::unlink(tmp_.c_str());
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  int fd() const { return fd_; }
  const std::string& path() const { return path_; }

  void commit() {
    const int fd = fd_;
    fd_ = -1;
    if (::close(fd) != 0) io_fail(path_, "close failed");
    if (::rename(tmp_.c_str(), path_.c_str()) != 0) io_fail(path_, "rename failed");
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  int fd_ = -1;
  bool committed_ = false;
};

bool is_block_section(const std::string& name) {
  return name == "lrefine" || name == "bnd_box" || name == "coord" || name.rfind("unknowns/", 0) == 0;
}

bool is_particle_section(const std::string& name) { return name.rfind("part/", 0) == 0; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<BlockKey> CheckpointSnapshot::block_keys() const {
  std::vector<BlockKey> keys;
  keys.reserve(nblocks());
  for (std::size_t b = 0; b < nblocks(); ++b) {
    const std::int64_t level = lrefine[b] - 1;
    if (level < 0 || level > domain.max_level) {
      throw FormatError(FormatErrorKind::BadValue, "lrefine", "block " + std::to_string(b) + " has lrefine " +
                                                                     std::to_string(lrefine[b]));
    }
    const int L = static_cast<int>(level);
    const double* bb = &bnd_box[4 * b];
    const BlockKey k{L, std::llround((bb[0] - domain.xlo) / domain.block_width_x(L)),
                     std::llround((bb[2] - domain.ylo) / domain.block_width_y(L))};
    const BoundingBox expect = domain.bnd_box(k);
    if (!domain.contains_block(k) || expect.lo[0] != bb[0] || expect.hi[0] != bb[1] || expect.lo[1] != bb[2] ||
        expect.hi[1] != bb[3]) {
      throw FormatError(FormatErrorKind::BadValue, "bnd_box",
                        "block " + std::to_string(b) + " does not lie on the level-" + std::to_string(L) + " lattice");
    }
    keys.push_back(k);
  }
  return keys;
}

int CheckpointSnapshot::var_index(std::string_view name) const {
  for (std::size_t v = 0; v < varnames.size(); ++v) {
    if (varnames[v] == name) return static_cast<int>(v);
  }
  return -1;
}

void CheckpointSnapshot::check_shapes() const {
  const std::size_t nb = nblocks();
  const std::size_t np = nparticles();
  auto fail = [](const char* section, const std::string& detail) {
    throw FormatError(FormatErrorKind::ShapeMismatch, section, detail);
  };
  if (bnd_box.size() != 4 * nb) fail("bnd_box", "expected 4 values per block");
  if (coord.size() != 2 * nb) fail("coord", "expected 2 values per block");
  if (unknowns.size() != varnames.size()) fail("varnames", "unknown arrays do not match variable names");
  for (std::size_t v = 0; v < unknowns.size(); ++v) {
    if (unknowns[v].size() != nb * kCellsPerBlock) fail("unknowns", "variable " + varnames[v] + " has wrong length");
  }
  if (posy.size() != np || ptemp.size() != np || pdens.size() != np || cpu.size() != np || tag.size() != np) {
    fail("part", "particle arrays differ in length");
  }
}

std::uint64_t ContainerLayout::file_size() const {
  std::uint64_t n = table_end();
  for (const auto& s : sections) n += s.nbytes;
  return n;
}

const SectionEntry* ContainerLayout::find(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ContainerLayout layout_of(const CheckpointSnapshot& snap) {
  snap.check_shapes();
  return place(section_list(snap.nblocks(), snap.nparticles(), snap.varnames));
}

std::uint64_t predicted_file_size(std::size_t nblocks, std::size_t nparticles, std::size_t nvars) {
  const std::uint64_t sections = 4 + 1 + 3 + nvars + 6;
  const std::uint64_t scalars = 8 * kRealNames.size() + 8 * kIntNames.size() +
                                kScalarNameBytes * (kRealNames.size() + kIntNames.size());
  const std::uint64_t grid = nblocks * (8 + 32 + 16 + nvars * 8 * kCellsPerBlock);
  std::uint64_t payload = scalars + kVarNameBytes * nvars + grid + 48 * nparticles;
  std::uint64_t count = sections;
  if (payload % 8 != 0) {
    payload += 8 - payload % 8;
    ++count;
  }
  return kHeaderBytes + kTableEntryBytes * count + payload;
}

std::vector<std::uint8_t> encode_checkpoint(const CheckpointSnapshot& snap) {
  const ContainerLayout layout = layout_of(snap);
  Payloads p;
  build_payloads(snap, layout, p);
  std::vector<std::uint8_t> out = header_and_table(layout);
  out.resize(layout.file_size(), 0);
  for (std::size_t i = 0; i < layout.sections.size(); ++i) {
    if (!p.spans[i].empty()) std::memcpy(out.data() + layout.sections[i].offset, p.spans[i].data(), p.spans[i].size());
  }
  return out;
}

CheckpointSnapshot decode_checkpoint(std::span<const std::uint8_t> bytes) {
  using K = FormatErrorKind;
  const std::uint64_t size = bytes.size();
  if (size < kHeaderBytes) throw FormatError(K::Truncated, "header", "file shorter than the 16-byte header");
  if (std::memcmp(bytes.data(), kFlxcMagic, 4) != 0) throw FormatError(K::BadMagic, "header", "not an FLXC file");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kFlxcVersion) {
    throw FormatError(K::VersionMismatch, "header", "file version " + std::to_string(version) + ", reader supports " +
                                                        std::to_string(kFlxcVersion));
  }
  const std::uint64_t nsec = get_u64(bytes.data() + 8);
  if (nsec > (size - kHeaderBytes) / kTableEntryBytes) {
    throw FormatError(K::Truncated, "section-table", std::to_string(nsec) + " entries do not fit in the file");
  }
  const std::uint64_t table_end = kHeaderBytes + kTableEntryBytes * nsec;

  std::vector<SectionEntry> table;
  for (std::uint64_t s = 0; s < nsec; ++s) {
    const std::uint8_t* t = bytes.data() + kHeaderBytes + kTableEntryBytes * s;
    SectionEntry e;
    e.name = trim_nul(t, kSectionNameBytes);
    e.dtype = static_cast<DType>(get_u32(t + 16));
    e.rank = get_u32(t + 20);
    for (int k = 0; k < 4; ++k) e.dims[static_cast<std::size_t>(k)] = get_u64(t + 24 + 8 * k);
    e.offset = get_u64(t + 56);
    e.nbytes = get_u64(t + 64);
    table.push_back(e);
  }
  for (const auto& e : table) {
    if (e.offset > size || e.nbytes > size - e.offset) {
      throw FormatError(K::Truncated, e.name, "section extends to byte " + std::to_string(e.offset + e.nbytes) +
                                                  " of a " + std::to_string(size) + "-byte file");
    }
  }
  {
    std::vector<const SectionEntry*> by_off;
    for (const auto& e : table) by_off.push_back(&e);
    std::stable_sort(by_off.begin(), by_off.end(),
                     [](const SectionEntry* a, const SectionEntry* b) { return a->offset < b->offset; });
    std::uint64_t end = table_end;
    for (const SectionEntry* e : by_off) {
      if (e->nbytes == 0) continue;
      if (e->offset < end) throw FormatError(K::Overlap, e->name, "section overlaps the preceding data");
      end = e->offset + e->nbytes;
    }
  }
  std::map<std::string, const SectionEntry*> by_name;
  for (const auto& e : table) {
    if (!by_name.emplace(e.name, &e).second) throw FormatError(K::Overlap, e.name, "duplicate section name");
  }

  auto need = [&](const std::string& name) -> const SectionEntry& {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError(K::MissingSection, name, "required section absent");
    return *it->second;
  };
  auto shape = [&](const SectionEntry& e, DType dt, std::initializer_list<std::uint64_t> dims) {
    std::array<std::uint64_t, 4> want{};
    std::size_t k = 0;
    std::uint64_t n = 1;
    for (auto d : dims) {
      want[k++] = d;
      n *= d;
    }
    const std::uint64_t esize = dt == DType::Utf8 ? 1 : kDoubleBytes;
    if (e.dtype != dt || e.rank != dims.size() || e.dims != want || e.nbytes != n * esize) {
      throw FormatError(K::ShapeMismatch, e.name, "unexpected dtype, rank, dims or byte count");
    }
  };
  auto payload = [&](const SectionEntry& e) { return bytes.subspan(e.offset, e.nbytes); };
  auto read_f64 = [&](const SectionEntry& e) {
    std::vector<double> v(e.nbytes / 8);
    if (!v.empty()) std::memcpy(v.data(), bytes.data() + e.offset, e.nbytes);
    return v;
  };
  auto read_i64 = [&](const SectionEntry& e) {
    std::vector<std::int64_t> v(e.nbytes / 8);
    if (!v.empty()) std::memcpy(v.data(), bytes.data() + e.offset, e.nbytes);
    return v;
  };

  const SectionEntry& sr = need("scalars.real");
  const SectionEntry& si = need("scalars.int");
  const SectionEntry& srn = need("scalars.realnm");
  const SectionEntry& sin = need("scalars.intnm");
  shape(sr, DType::F64, {sr.dims[0]});
  shape(si, DType::I64, {si.dims[0]});
  shape(srn, DType::Utf8, {sr.dims[0], kScalarNameBytes});
  shape(sin, DType::Utf8, {si.dims[0], kScalarNameBytes});
  std::map<std::string, double> reals;
  std::map<std::string, std::int64_t> ints;
  {
    const auto rv = read_f64(sr);
    const auto rn = fixed_width_names(payload(srn), kScalarNameBytes);
    for (std::size_t i = 0; i < rv.size(); ++i) reals.emplace(rn[i], rv[i]);
    const auto iv = read_i64(si);
    const auto in = fixed_width_names(payload(sin), kScalarNameBytes);
    for (std::size_t i = 0; i < iv.size(); ++i) ints.emplace(in[i], iv[i]);
  }
  auto real = [&](std::string_view n) {
    const auto it = reals.find(std::string(n));
    if (it == reals.end()) throw FormatError(K::MissingSection, "scalars.real", "no scalar '" + std::string(n) + "'");
    return it->second;
  };
  auto integer = [&](std::string_view n) {
    const auto it = ints.find(std::string(n));
    if (it == ints.end()) throw FormatError(K::MissingSection, "scalars.int", "no scalar '" + std::string(n) + "'");
    return it->second;
  };

  CheckpointSnapshot s;
  s.time = real("time");
  s.dt = real("dt");
  s.domain.xlo = real("xmin");
  s.domain.xhi = real("xmax");
  s.domain.ylo = real("ymin");
  s.domain.yhi = real("ymax");
  s.gamma = real("gamma");
  s.cfl = real("cfl");
  s.refine.refine_thresh = real("refine_thresh");
  s.refine.derefine_thresh = real("derefine_thresh");
  s.refine.filter = real("refine_filter");
  s.step = integer("step");
  s.checkpoint_number = integer("checkpoint_num");
  const std::int64_t nb = integer("nblocks");
  const std::int64_t np = integer("nparticles");
  const std::int64_t rep = integer("source_rep");
  s.domain.base_nx = static_cast<int>(integer("base_nx"));
  s.domain.base_ny = static_cast<int>(integer("base_ny"));
  s.domain.max_level = static_cast<int>(integer("max_level"));
  s.refine_interval = integer("refine_interval");
  const std::int64_t mask = integer("refine_vars");
  s.refine.buffer_cells = static_cast<int>(integer("buffer_cells"));

  if (integer("nxb") != kNxb || integer("nyb") != kNyb) {
    throw FormatError(K::BadValue, "scalars.int", "block size differs from 8x8");
  }
  if (nb < 0 || np < 0) throw FormatError(K::BadValue, "scalars.int", "negative block or particle count");
  if (rep != 0 && rep != 1) throw FormatError(K::BadValue, "scalars.int", "unknown source_rep " + std::to_string(rep));
  s.source_rep = static_cast<Representation>(rep);
  try {
    s.domain.validate();
  } catch (const ConfigError& e) {
    throw FormatError(K::BadValue, "scalars.real", e.what());
  }
  s.refine.vars.clear();
  for (int v = 0; v < kNumVars; ++v) {
    if (mask & (std::int64_t{1} << v)) s.refine.vars.push_back(static_cast<Var>(v));
  }

  const auto unb = static_cast<std::uint64_t>(nb);
  const auto unp = static_cast<std::uint64_t>(np);
  const SectionEntry& vn = need("varnames");
  shape(vn, DType::Utf8, {vn.dims[0], kVarNameBytes});
  s.varnames = fixed_width_names(payload(vn), kVarNameBytes);

  const SectionEntry& lr = need("lrefine");
  shape(lr, DType::I64, {unb});
  const SectionEntry& bb = need("bnd_box");
  shape(bb, DType::F64, {unb, 2, 2});
  const SectionEntry& co = need("coord");
  shape(co, DType::F64, {unb, 2});
  s.lrefine = read_i64(lr);
  s.bnd_box = read_f64(bb);
  s.coord = read_f64(co);
  for (const auto& v : s.varnames) {
    const SectionEntry& u = need(unknown_section(v));
    shape(u, DType::F64, {unb, kNyb, kNxb});
    s.unknowns.push_back(read_f64(u));
  }
  auto part_f64 = [&](const char* name, std::vector<double>& dst) {
    const SectionEntry& e = need(name);
    shape(e, DType::F64, {unp});
    dst = read_f64(e);
  };
  auto part_i64 = [&](const char* name, std::vector<std::int64_t>& dst) {
    const SectionEntry& e = need(name);
    shape(e, DType::I64, {unp});
    dst = read_i64(e);
  };
  part_f64("part/posx", s.posx);
  part_f64("part/posy", s.posy);
  part_f64("part/ptemp", s.ptemp);
  part_f64("part/pdens", s.pdens);
  part_i64("part/cpu", s.cpu);
  part_i64("part/tag", s.tag);

  const auto keys = s.block_keys();
  for (std::size_t b = 0; b < keys.size(); ++b) {
    const auto c = s.domain.block_center(keys[b]);
    if (c[0] != s.coord[2 * b] || c[1] != s.coord[2 * b + 1]) {
      throw FormatError(K::BadValue, "coord", "block " + std::to_string(b) + " center does not match its bnd_box");
    }
  }
  return s;
}

std::uint64_t write_checkpoint(const std::string& path, const CheckpointSnapshot& snap) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(snap);
  TempFile f(path);
  pwrite_all(f.fd(), path, bytes, 0);
  f.commit();
  return bytes.size();
}

CheckpointSnapshot read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file: " + std::strerror(errno));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path + ": read failed");
  try {
    return decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), e.section(), path + ": " + e.detail());
  }
}

RankedWriteStats write_checkpoint_ranked(const std::string& path, const CheckpointSnapshot& snap, int nranks) {
  if (nranks > 1 && static_cast<std::size_t>(nranks) > snap.nblocks()) {
    throw ConfigError(std::to_string(nranks) + " ranks for " + std::to_string(snap.nblocks()) + " blocks");
  }
  const ContainerLayout layout = layout_of(snap);
  Payloads p;
  build_payloads(snap, layout, p);
  const auto blocks = even_ranges(static_cast<std::int64_t>(snap.nblocks()), nranks);
  const auto parts = even_ranges(static_cast<std::int64_t>(snap.nparticles()), nranks);

  RankedWriteStats stats;
  stats.bytes = layout.file_size();
  TempFile f(path);
  if (::ftruncate(f.fd(), static_cast<off_t>(stats.bytes)) != 0) io_fail(path, "cannot size file");

  auto write_range = [&](std::size_t sec, std::uint64_t per_item, std::int64_t lo, std::int64_t hi) {
    const auto b = p.spans[sec];
    const std::uint64_t start = static_cast<std::uint64_t>(lo) * per_item;
    const std::uint64_t len = static_cast<std::uint64_t>(hi - lo) * per_item;
    if (len > 0) pwrite_all(f.fd(), path, b.subspan(start, len), layout.sections[sec].offset + start);
  };

  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < nranks; ++r) {
    if (r == 0) {
      pwrite_all(f.fd(), path, header_and_table(layout), 0);
      for (std::size_t s = 0; s < layout.sections.size(); ++s) {
        const auto& name = layout.sections[s].name;
        if (!is_block_section(name) && !is_particle_section(name) && !p.spans[s].empty()) {
          pwrite_all(f.fd(), path, p.spans[s], layout.sections[s].offset);
        }
      }
    }
    for (std::size_t s = 0; s < layout.sections.size(); ++s) {
      const auto& e = layout.sections[s];
      if (!is_block_section(e.name) || snap.nblocks() == 0) continue;
      write_range(s, e.nbytes / snap.nblocks(), blocks[static_cast<std::size_t>(r)],
                  blocks[static_cast<std::size_t>(r) + 1]);
    }
  }
  stats.t_grid_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < nranks; ++r) {
    for (std::size_t s = 0; s < layout.sections.size(); ++s) {
      if (!is_particle_section(layout.sections[s].name)) continue;
      write_range(s, 8, parts[static_cast<std::size_t>(r)], parts[static_cast<std::size_t>(r) + 1]);
    }
  }
  stats.t_particles_s = seconds_since(t0);
  f.commit();
  return stats;
}

CheckpointSnapshot snapshot_of(const HydroState& state, const ParticleSet& ps, const SnapshotMeta& meta) {
  if (!state.mesh) throw PreconditionError("snapshot of a state without a mesh");
  const MeshAccess& mesh = *state.mesh;
  CheckpointSnapshot s;
  s.time = state.time;
  s.dt = state.dt;
  s.step = state.step;
  s.checkpoint_number = meta.checkpoint_number;
  s.source_rep = meta.source_rep.value_or(mesh.rep());
  s.domain = mesh.domain();
  s.gamma = state.gamma;
  s.cfl = state.cfl;
  s.refine = state.refine;
  s.refine_interval = state.refine_interval;
  s.varnames.assign(kVarNames.begin(), kVarNames.end());

  const auto leaves = mesh.leaves();
  const std::size_t nb = leaves.size();
  s.lrefine.reserve(nb);
  s.bnd_box.reserve(4 * nb);
  s.coord.reserve(2 * nb);
  s.unknowns.assign(kNumVars, {});
  for (auto& u : s.unknowns) u.reserve(nb * kCellsPerBlock);
  for (const LeafRef& leaf : leaves) {
    s.lrefine.push_back(leaf.key.level + 1);
    const BoundingBox b = s.domain.bnd_box(leaf.key);
    s.bnd_box.insert(s.bnd_box.end(), {b.lo[0], b.hi[0], b.lo[1], b.hi[1]});
    const auto c = s.domain.block_center(leaf.key);
    s.coord.insert(s.coord.end(), {c[0], c[1]});
    for (int v = 0; v < kNumVars; ++v) {
      auto& u = s.unknowns[static_cast<std::size_t>(v)];
      for (int j = 0; j < kNyb; ++j) {
        for (int i = 0; i < kNxb; ++i) u.push_back(leaf.value(v, i, j));
      }
    }
  }

  ParticleSet sorted = ps;
  sorted.sort_canonical();
  sorted.check_identities();
  for (const auto& p : sorted.particles) {
    s.posx.push_back(p.posx);
    s.posy.push_back(p.posy);
    s.ptemp.push_back(p.ptemp);
    s.pdens.push_back(p.pdens);
    s.cpu.push_back(p.cpu_id);
    s.tag.push_back(p.tag);
  }
  return s;
}

bool bit_identical(const CheckpointSnapshot& a, const CheckpointSnapshot& b) {
  return encode_checkpoint(a) == encode_checkpoint(b);
}

}  // namespace amrckpt
