#include "attsim/mcu.hpp"

namespace attsim {

void load_program(McuState& st, std::span<const std::uint8_t> image,
                  const MemoryMap& map) {
  if (image.size() > map.pmem.len) throw ImageError("image exceeds pmem");
  st.mem.assign(0x10000, 0);
  st.regs.fill(0);
  for (std::size_t i = 0; i < image.size(); ++i)
    st.mem[map.pmem.start + i] = image[i];
  st.set_pc(static_cast<Word>(map.pmem.start));
  st.set_sp(static_cast<Word>(map.dmem.end()));
  st.cycles = 0;
  st.zf = st.cf = false;
  st.irq_pending = false;
  st.dma = {};
  st.halted = false;
  st.fault = Fault::None;
}

void mcu_reset(McuState& st, const MemoryMap& map) {
  st.regs.fill(0);
  st.set_pc(map.boot_vector);
  st.set_sp(static_cast<Word>(map.dmem.end()));
  for (std::uint32_t a = map.dmem.start; a < map.dmem.end(); ++a) st.mem[a] = 0;
  st.zf = st.cf = false;
  st.irq_pending = false;
  st.dma = {};
  st.mem[map.dma_ctl] = 0;
  st.mem[static_cast<Address>(map.dma_ctl + 1)] = 0;
  st.halted = false;
  st.fault = Fault::None;
}

namespace {

bool word_ok(const MemoryMap& map, Address a) {
  return (a % 2) == 0 && map.mapped(a) &&
         map.mapped(static_cast<Address>(a + 1));
}

struct MemReader {
  const McuState& st;
  const MemoryMap& map;
  const IoState& io;

  // Word read as the core sees it; peripheral ports have special sources.
  Word read(Address a) const {
    if (a == map.gpio_in) return io.gpio_in.empty() ? 0 : io.gpio_in.front();
    if (a == map.rtc) return static_cast<Word>(st.cycles & 0xFFFF);
    return st.read_word(a);
  }
};

void add_read(BusSignals& sig, const MemoryMap& map, Address a,
              MemAccess::Agent agent) {
  (void)map;
  sig.accesses.push_back({a, MemAccess::Kind::Read, agent});
}

void add_write(BusSignals& sig, const MemoryMap& map, Address a,
               MemAccess::Agent agent) {
  sig.accesses.push_back({a, MemAccess::Kind::Write, agent});
  if (map.pmem.contains(a)) sig.pmem_write = true;
}

void compute_core(const McuState& st, const MemoryMap& map, const IoState& io,
                  StepEffect& eff, BusSignals& sig) {
  const Word pc = st.pc();
  const MemReader rd{st, map, io};

  if (!(map.pmem.contains(pc) || map.rom.contains(pc))) {
    eff.fault = Fault::Bus;
    return;
  }

  std::uint8_t buf[4] = {st.mem[pc], st.mem[static_cast<Address>(pc + 1)],
                         st.mem[static_cast<Address>(pc + 2)],
                         st.mem[static_cast<Address>(pc + 3)]};
  auto dec = isa_decode(buf);
  if (!dec) {
    eff.fault = Fault::Decode;
    return;
  }
  const Instruction ins = *dec;
  eff.cycles = isa_cycles(ins.op);
  eff.instr_size = static_cast<std::uint8_t>(isa_size(ins.op));
  const Word next = static_cast<Word>(pc + isa_size(ins.op));
  eff.next_pc = next;

  auto data_read = [&](Address a, Word& out) -> bool {
    if (!word_ok(map, a)) {
      add_read(sig, map, a, MemAccess::Agent::Core);
      eff.fault = (a % 2) ? Fault::Align : Fault::Bus;
      return false;
    }
    add_read(sig, map, a, MemAccess::Agent::Core);
    out = rd.read(a);
    return true;
  };
  auto data_write = [&](Address a, Word v) -> bool {
    if (!word_ok(map, a)) {
      add_write(sig, map, a, MemAccess::Agent::Core);
      eff.fault = (a % 2) ? Fault::Align : Fault::Bus;
      return false;
    }
    add_write(sig, map, a, MemAccess::Agent::Core);
    eff.mem_writes.push_back({a, v});
    // DMA control register launches a transfer from the staged src/dst/len.
    if (a == map.dma_ctl && v != 0) {
      DmaConfig d;
      d.src = st.read_word(map.dma_src);
      d.dst = st.read_word(map.dma_dst);
      d.len_words = st.read_word(map.dma_len);
      d.progress = 0;
      d.active = true;
      bool ok = d.len_words > 0;
      for (std::uint32_t i = 0; ok && i < d.len_words; ++i) {
        if (!word_ok(map, static_cast<Address>(d.src + 2 * i)) ||
            !word_ok(map, static_cast<Address>(d.dst + 2 * i)))
          ok = false;
      }
      if (ok) {
        eff.dma_activate = true;
        eff.dma_next = d;
      }
    }
    return true;
  };
  auto stack_push = [&](Word v) -> bool {
    const Address a = static_cast<Address>(st.sp() - 2);
    if (!map.dmem.contains(a)) {
      add_write(sig, map, a, MemAccess::Agent::Core);
      eff.fault = Fault::Bus;
      return false;
    }
    if (!data_write(a, v)) return false;
    eff.reg_writes.push_back({kRegSp, a});
    return true;
  };
  auto stack_pop = [&](Word& out) -> bool {
    const Address a = st.sp();
    if (!map.dmem.contains(a)) {
      add_read(sig, map, a, MemAccess::Agent::Core);
      eff.fault = Fault::Bus;
      return false;
    }
    if (!data_read(a, out)) return false;
    eff.reg_writes.push_back({kRegSp, static_cast<Word>(a + 2)});
    return true;
  };
  auto alu = [&](Word a, Word b, Opcode op) -> Word {
    std::uint32_t r = 0;
    switch (op) {
      case Opcode::Add:
        r = static_cast<std::uint32_t>(a) + b;
        eff.cf = r > 0xFFFF;
        break;
      case Opcode::Sub:
      case Opcode::Cmp:
        r = static_cast<std::uint32_t>(a) - b;
        eff.cf = a < b;
        break;
      case Opcode::And:
        r = a & b;
        eff.cf = false;
        break;
      case Opcode::Xor:
        r = a ^ b;
        eff.cf = false;
        break;
      default:
        break;
    }
    eff.set_flags = true;
    eff.zf = (r & 0xFFFF) == 0;
    return static_cast<Word>(r);
  };

  switch (ins.op) {
    case Opcode::Nop:
      break;
    case Opcode::Halt:
      eff.halt = true;
      break;
    case Opcode::Movi:
      eff.reg_writes.push_back({ins.rd, ins.imm});
      break;
    case Opcode::Mov:
      eff.reg_writes.push_back({ins.rd, st.regs[ins.rs]});
      break;
    case Opcode::Ld: {
      const Address a = static_cast<Address>(st.regs[ins.rs] + ins.imm);
      Word v;
      if (data_read(a, v)) eff.reg_writes.push_back({ins.rd, v});
      break;
    }
    case Opcode::St: {
      const Address a = static_cast<Address>(st.regs[ins.rs] + ins.imm);
      data_write(a, st.regs[ins.rd]);
      break;
    }
    case Opcode::Ldi: {
      Word v;
      if (data_read(ins.imm, v)) eff.reg_writes.push_back({ins.rd, v});
      break;
    }
    case Opcode::Sti:
      data_write(ins.imm, st.regs[ins.rd]);
      break;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::And:
    case Opcode::Xor:
      eff.reg_writes.push_back(
          {ins.rd, alu(st.regs[ins.rd], st.regs[ins.rs], ins.op)});
      break;
    case Opcode::Cmp:
      alu(st.regs[ins.rd], st.regs[ins.rs], Opcode::Cmp);
      break;
    case Opcode::Jmp:
      eff.next_pc = ins.imm;
      break;
    case Opcode::Jz:
      if (st.zf) eff.next_pc = ins.imm;
      break;
    case Opcode::Jnz:
      if (!st.zf) eff.next_pc = ins.imm;
      break;
    case Opcode::Jc:
      if (st.cf) eff.next_pc = ins.imm;
      break;
    case Opcode::Jmpr:
      eff.next_pc = st.regs[ins.rd];
      break;
    case Opcode::Call:
      if (stack_push(next)) eff.next_pc = ins.imm;
      break;
    case Opcode::Ret: {
      Word v;
      if (stack_pop(v)) eff.next_pc = v;
      break;
    }
    case Opcode::Push:
      stack_push(st.regs[ins.rd]);
      break;
    case Opcode::Pop: {
      Word v;
      if (stack_pop(v)) eff.reg_writes.push_back({ins.rd, v});
      break;
    }
    case Opcode::In: {
      const Address a = static_cast<Address>(map.periph.start + ins.imm);
      if (!map.periph.contains(a) ||
          !map.periph.contains(static_cast<Address>(a + 1)) || (a % 2)) {
        eff.fault = Fault::Bus;
        break;
      }
      add_read(sig, map, a, MemAccess::Agent::Core);
      Word v = rd.read(a);
      if (a == map.gpio_in) eff.pop_input = true;
      eff.reg_writes.push_back({ins.rd, v});
      break;
    }
    case Opcode::Out: {
      const Address a = static_cast<Address>(map.periph.start + ins.imm);
      if (!map.periph.contains(a) ||
          !map.periph.contains(static_cast<Address>(a + 1)) || (a % 2)) {
        eff.fault = Fault::Bus;
        break;
      }
      add_write(sig, map, a, MemAccess::Agent::Core);
      eff.mem_writes.push_back({a, st.regs[ins.rd]});
      if (a == map.gpio_out) {
        eff.push_output = true;
        eff.output_word = st.regs[ins.rd];
      }
      break;
    }
  }
}

}  // namespace

void compute_step(const McuState& st, const MemoryMap& map, const IoState& io,
                  StepEffect& eff, BusSignals& sig) {
  eff = {};
  sig = {};
  sig.pc = st.pc();
  eff.next_pc = st.pc();

  if (st.dma.active) {
    const Address src = static_cast<Address>(st.dma.src + 2 * st.dma.progress);
    const Address dst = static_cast<Address>(st.dma.dst + 2 * st.dma.progress);
    add_read(sig, map, src, MemAccess::Agent::Dma);
    add_write(sig, map, dst, MemAccess::Agent::Dma);
    eff.dma_word = true;
    eff.mem_writes.push_back({dst, st.read_word(src)});
    eff.dma_done = st.dma.progress + 1 >= st.dma.len_words;
    eff.cycles = kDmaWordCycles;
    return;
  }

  if (st.irq_pending) {
    sig.irq = true;
    eff.irq_serviced = true;
    eff.cycles = kIrqServiceCycles;
    const Address a = static_cast<Address>(st.sp() - 2);
    if (!map.dmem.contains(a) || (a % 2)) {
      eff.fault = Fault::Bus;
      return;
    }
    add_write(sig, map, a, MemAccess::Agent::Core);
    eff.mem_writes.push_back({a, st.pc()});
    eff.reg_writes.push_back({kRegSp, a});
    eff.next_pc = map.irq_vector;
    return;
  }

  compute_core(st, map, io, eff, sig);
}

void commit_step(McuState& st, IoState& io, const StepEffect& eff) {
  if (eff.fault != Fault::None) {
    // A faulting step has no architectural effect beyond the fault itself.
    st.halted = true;
    st.fault = eff.fault;
    st.cycles += eff.cycles;
    return;
  }
  for (const auto& [a, v] : eff.mem_writes) st.write_word(a, v);
  for (const auto& [r, v] : eff.reg_writes) st.regs[r] = v;
  if (eff.set_flags) {
    st.zf = eff.zf;
    st.cf = eff.cf;
  }
  st.set_pc(eff.next_pc);
  if (eff.pop_input && !io.gpio_in.empty()) io.gpio_in.pop_front();
  if (eff.push_output) io.gpio_out.push_back(eff.output_word);
  if (eff.irq_serviced) st.irq_pending = false;
  if (eff.dma_word) {
    st.dma.progress++;
    if (eff.dma_done) st.dma.active = false;
  }
  if (eff.dma_activate) st.dma = eff.dma_next;
  if (eff.halt) st.halted = true;
  st.cycles += eff.cycles;
}

}  // namespace attsim
