#include "dare/memory_image.hpp"

#include <algorithm>
#include <cstring>

#include "dare/error.hpp"
#include "dare/isa.hpp"

namespace dare::kernel {

namespace {

constexpr uint64_t kFirstBase = 0x10000;
constexpr uint64_t kGap = isa::kLineBytes;

std::string hex(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

uint64_t MemoryImage::next_base() const {
  if (segments_.empty()) return kFirstBase;
  const uint64_t end = segments_.rbegin()->second.end() + kGap;
  return (end + isa::kLineBytes - 1) & ~(isa::kLineBytes - 1);
}

uint64_t MemoryImage::append(std::string name, std::vector<uint8_t> bytes) {
  const uint64_t base = next_base();
  insert(std::move(name), base, std::move(bytes));
  return base;
}

void MemoryImage::insert(std::string name, uint64_t base, std::vector<uint8_t> bytes) {
  if (base % isa::kLineBytes != 0) throw ConfigError("segment " + name + " base is not 64-byte aligned");
  if (base + bytes.size() > isa::kAddrLimit) throw ConfigError("segment " + name + " exceeds the 48-bit space");
  if (has_segment(name)) throw ConfigError("duplicate segment name " + name);
  const uint64_t end = base + bytes.size();
  auto next = segments_.lower_bound(base);
  if (next != segments_.end() && next->second.base < std::max(end, base + 1))
    throw ConfigError("segment " + name + " overlaps " + next->second.name);
  if (next != segments_.begin()) {
    auto prev = std::prev(next);
    if (prev->second.end() > base) throw ConfigError("segment " + name + " overlaps " + prev->second.name);
  }
  segments_.emplace(base, Segment{std::move(name), base, std::move(bytes)});
}

const Segment* MemoryImage::locate(uint64_t addr, uint64_t len) const {
  auto it = segments_.upper_bound(addr);
  if (it == segments_.begin()) return nullptr;
  --it;
  const Segment& s = it->second;
  if (addr < s.base || addr + len > s.end()) return nullptr;
  return &s;
}

Segment* MemoryImage::locate(uint64_t addr, uint64_t len) {
  return const_cast<Segment*>(std::as_const(*this).locate(addr, len));
}

void MemoryImage::read(uint64_t addr, std::span<uint8_t> out, uint64_t instr_id) const {
  const Segment* s = locate(addr, out.size());
  if (!s) throw FaultError("read of " + std::to_string(out.size()) + " bytes at " + hex(addr) + " is unmapped", instr_id);
  std::memcpy(out.data(), s->bytes.data() + (addr - s->base), out.size());
}

void MemoryImage::write(uint64_t addr, std::span<const uint8_t> in, uint64_t instr_id) {
  Segment* s = locate(addr, in.size());
  if (!s) throw FaultError("write of " + std::to_string(in.size()) + " bytes at " + hex(addr) + " is unmapped", instr_id);
  std::memcpy(s->bytes.data() + (addr - s->base), in.data(), in.size());
}

const Segment& MemoryImage::segment(const std::string& name) const {
  for (const auto& [base, s] : segments_)
    if (s.name == name) return s;
  throw ConfigError("no segment named " + name);
}

Segment& MemoryImage::segment(const std::string& name) {
  return const_cast<Segment&>(std::as_const(*this).segment(name));
}

bool MemoryImage::has_segment(const std::string& name) const {
  return std::any_of(segments_.begin(), segments_.end(), [&](const auto& kv) { return kv.second.name == name; });
}

}  // namespace dare::kernel
