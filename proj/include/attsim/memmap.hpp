#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "attsim/isa.hpp"

namespace attsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AsmError : Error {
  using Error::Error;
};
struct ImageError : Error {
  using Error::Error;
};
struct DmaRangeError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct WireError : Error {
  using Error::Error;
};
struct InstrumentError : Error {
  using Error::Error;
};

struct Range {
  Address start = 0;
  std::uint32_t len = 0;

  std::uint32_t end() const { return start + len; }  // exclusive
  bool contains(Address a) const { return a >= start && a < end(); }
  bool contains_span(Address a, std::uint32_t n) const {
    return a >= start && static_cast<std::uint32_t>(a) + n <= end();
  }
  bool overlaps(Address a, std::uint32_t n) const {
    return static_cast<std::uint32_t>(a) < end() && a + n > start;
  }
};

enum class RegionKind { Rom, Pmem, Dmem, Periph, Monitor, Unmapped };

// Flat 64 KiB address space. ROM holds the boot stub, the attestation stub
// and the device key; the monitor page holds the challenge, the LMT field
// and the execute-region metadata registers.
struct MemoryMap {
  Range rom;
  Range pmem;
  Range dmem;
  Range periph;
  Range monitor;

  // rom-resident protected ranges
  Range k_region;
  Range swatt;
  Address swatt_entry = 0;
  Address swatt_body = 0;  // representative in-stub PC used for sweep reads
  Address swatt_exit = 0;  // last stub instruction; legal exit point

  // monitor page fields
  Range chal;  // 16 bytes
  Range lmt;   // 16 bytes
  Address er_min_reg = 0;
  Address er_max_reg = 0;
  Address or_min_reg = 0;
  Address or_max_reg = 0;
  Range metadata;  // the four registers as one attestable range

  // peripheral ports (absolute addresses)
  Address gpio_in = 0;
  Address gpio_out = 0;
  Address rtc = 0;
  Address dma_src = 0;
  Address dma_dst = 0;
  Address dma_len = 0;
  Address dma_ctl = 0;
  Address report_port = 0;

  Address boot_vector = 0;
  Address irq_vector = 0;   // default handler address (in pmem)
  Address stack_base = 0;   // highest word address of the stack

  RegionKind classify(Address a) const;
  bool mapped(Address a) const { return classify(a) != RegionKind::Unmapped; }

  // Standard layout; pmem_kib in {1,2,4,8}.
  static MemoryMap standard(unsigned pmem_kib = 8);
};

std::string memmap_to_text(const MemoryMap& m);  // sidecar map file format

}  // namespace attsim
