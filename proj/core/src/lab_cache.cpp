#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>

#include "nilflow/lab.hpp"

namespace nilflow::lab {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::mutex g_inuse_mutex;
std::multiset<std::string> g_inuse;  // keys pinned by running jobs

std::filesystem::path key_path(const std::filesystem::path& dir, const std::string& key) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(key)));
  return dir / (std::string(buf) + ".seg");
}

constexpr char kMagic[4] = {'N', 'F', 'C', '1'};

}  // namespace

std::optional<equidist::TorusPoints> cache_load(const std::filesystem::path& dir,
                                                const std::string& key) {
  const auto p = key_path(dir, key);
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) return std::nullopt;
  equidist::TorusPoints pts;
  pts.dim = static_cast<int>(dim);
  pts.flat.resize(count * dim);
  in.read(reinterpret_cast<char*>(pts.flat.data()),
          static_cast<std::streamsize>(pts.flat.size() * sizeof(double)));
  if (!in) return std::nullopt;
  // refresh LRU position
  std::error_code ec;
  std::filesystem::last_write_time(p, std::filesystem::file_time_type::clock::now(), ec);
  return pts;
}

void cache_store(const std::filesystem::path& dir, const std::string& key,
                 const equidist::TorusPoints& pts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto p = key_path(dir, key);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IOFailure("cannot write cache segment " + p.string());
  const std::uint32_t dim = static_cast<std::uint32_t>(pts.dim);
  const std::uint64_t count = pts.count();
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(pts.flat.data()),
            static_cast<std::streamsize>(pts.flat.size() * sizeof(double)));
  if (!out) throw IOFailure("short write on cache segment " + p.string());
}

CachePin::CachePin(std::string key) : key_(std::move(key)) {
  std::lock_guard<std::mutex> lk(g_inuse_mutex);
  g_inuse.insert(key_);
}

std::size_t cache_pin_count() {
  std::lock_guard<std::mutex> lk(g_inuse_mutex);
  return g_inuse.size();
}

CachePin::~CachePin() {
  std::lock_guard<std::mutex> lk(g_inuse_mutex);
  const auto it = g_inuse.find(key_);
  if (it != g_inuse.end()) g_inuse.erase(it);
}

std::uintmax_t cache_gc(const std::filesystem::path& cache_dir,
                        std::uintmax_t max_bytes) {
  if (!std::filesystem::exists(cache_dir)) return 0;
  struct Entry {
    std::filesystem::path path;
    std::filesystem::file_time_type mtime;
    std::uintmax_t size;
    std::string stem;
  };
  std::vector<Entry> entries;
  std::uintmax_t total = 0;
  for (const auto& de : std::filesystem::directory_iterator(cache_dir)) {
    if (!de.is_regular_file() || de.path().extension() != ".seg") continue;
    entries.push_back({de.path(), de.last_write_time(), de.file_size(),
                       de.path().stem().string()});
    total += entries.back().size;
  }
  if (total <= max_bytes) return 0;

  std::set<std::string> pinned_names;
  {
    std::lock_guard<std::mutex> lk(g_inuse_mutex);
    for (const auto& key : g_inuse) {
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(fnv1a(key)));
      pinned_names.insert(buf);
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.mtime < b.mtime; });
  std::uintmax_t freed = 0;
  for (const auto& e : entries) {
    if (total - freed <= max_bytes) break;
    if (pinned_names.count(e.stem)) continue;
    std::error_code ec;
    if (std::filesystem::remove(e.path, ec) && !ec) freed += e.size;
  }
  return freed;
}

}  // namespace nilflow::lab
