#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace attsim {

using Digest = std::array<std::uint8_t, 32>;

class Sha256 {
 public:
  Sha256() { init(); }
  void update(std::span<const std::uint8_t> data);
  Digest finish();

 private:
  void init();
  void process(const std::uint8_t* block);

  std::array<std::uint32_t, 8> h_{};
  std::array<std::uint8_t, 64> buf_{};
  std::size_t buf_len_ = 0;
  std::uint64_t total_ = 0;
};

Digest sha256(std::span<const std::uint8_t> data);

Digest hmac_sha256(std::span<const std::uint8_t> key,
                   std::span<const std::uint8_t> msg);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(const std::string& hex);

}  // namespace attsim
