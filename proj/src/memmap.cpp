#include "attsim/memmap.hpp"

#include <sstream>

namespace attsim {

RegionKind MemoryMap::classify(Address a) const {
  if (rom.contains(a)) return RegionKind::Rom;
  if (pmem.contains(a)) return RegionKind::Pmem;
  if (dmem.contains(a)) return RegionKind::Dmem;
  if (periph.contains(a)) return RegionKind::Periph;
  if (monitor.contains(a)) return RegionKind::Monitor;
  return RegionKind::Unmapped;
}

MemoryMap MemoryMap::standard(unsigned pmem_kib) {
  if (pmem_kib == 0 || pmem_kib > 8) throw ConfigError("pmem_kib must be 1..8");
  MemoryMap m;
  m.rom = {0x0000, 0x1000};
  m.pmem = {0x1000, pmem_kib * 1024u};
  m.dmem = {0x3000, 0x1000};
  m.periph = {0xF000, 0x0100};
  m.monitor = {0xFF00, 0x0100};

  m.k_region = {0x0FE0, 32};
  m.swatt = {0x0010, 16};
  m.swatt_entry = 0x0010;
  m.swatt_body = 0x0014;
  m.swatt_exit = 0x001E;

  m.chal = {0xFF00, 16};
  m.lmt = {0xFF10, 16};
  m.er_min_reg = 0xFF20;
  m.er_max_reg = 0xFF22;
  m.or_min_reg = 0xFF24;
  m.or_max_reg = 0xFF26;
  m.metadata = {0xFF20, 8};

  m.gpio_in = 0xF000;
  m.gpio_out = 0xF002;
  m.rtc = 0xF004;
  m.dma_src = 0xF010;
  m.dma_dst = 0xF012;
  m.dma_len = 0xF014;
  m.dma_ctl = 0xF016;
  m.report_port = 0xF020;

  m.boot_vector = 0x0000;
  m.irq_vector = static_cast<Address>(m.pmem.start);
  m.stack_base = static_cast<Address>(m.dmem.end() - 2);
  return m;
}

std::string memmap_to_text(const MemoryMap& m) {
  std::ostringstream os;
  auto hex = [](std::uint32_t v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04X", v);
    return std::string(buf);
  };
  os << "# attsim memory map v1\n";
  os << "region rom " << hex(m.rom.start) << " " << hex(m.rom.len) << "\n";
  os << "region pmem " << hex(m.pmem.start) << " " << hex(m.pmem.len) << "\n";
  os << "region dmem " << hex(m.dmem.start) << " " << hex(m.dmem.len) << "\n";
  os << "region periph " << hex(m.periph.start) << " " << hex(m.periph.len) << "\n";
  os << "region monitor " << hex(m.monitor.start) << " " << hex(m.monitor.len)
     << "\n";
  os << "entry " << hex(m.pmem.start) << "\n";
  return os.str();
}

}  // namespace attsim
