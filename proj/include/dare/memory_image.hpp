#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dare::kernel {

struct Segment {
  std::string name;
  uint64_t base = 0;
  std::vector<uint8_t> bytes;

  uint64_t end() const { return base + bytes.size(); }
  bool operator==(const Segment&) const = default;
};

// Flat byte-addressable memory made of named, non-overlapping, 64-byte
// aligned segments. Accesses that straddle or miss a segment fault.
class MemoryImage {
 public:
  // Places a segment at the next free 64-byte aligned address and returns its base.
  uint64_t append(std::string name, std::vector<uint8_t> bytes);
  // Places a segment at an explicit base. Throws ConfigError on misalignment,
  // overlap or a duplicate name.
  void insert(std::string name, uint64_t base, std::vector<uint8_t> bytes);

  // Address the next append() would use.
  uint64_t next_base() const;

  bool contains(uint64_t addr, uint64_t len) const { return locate(addr, len) != nullptr; }

  // Throw FaultError tagged with instr_id when the range is unmapped.
  void read(uint64_t addr, std::span<uint8_t> out, uint64_t instr_id) const;
  void write(uint64_t addr, std::span<const uint8_t> in, uint64_t instr_id);

  const Segment& segment(const std::string& name) const;
  Segment& segment(const std::string& name);
  bool has_segment(const std::string& name) const;
  const std::map<uint64_t, Segment>& segments() const { return segments_; }

  bool operator==(const MemoryImage&) const = default;

 private:
  const Segment* locate(uint64_t addr, uint64_t len) const;
  Segment* locate(uint64_t addr, uint64_t len);

  std::map<uint64_t, Segment> segments_;
};

}  // namespace dare::kernel
