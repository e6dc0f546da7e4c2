#pragma once

#include <string>
#include <vector>

#include "factedit/tensor.hpp"

namespace factedit {

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

// Binary parameter container: magic "FGSM1", format version, model kind,
// vocabulary listing, (name, shape) manifest, float32 little-endian
// payload in manifest order, trailing 64-bit payload checksum.
struct Checkpoint {
  static constexpr const char* kMagic = "FGSM1";
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;
  std::vector<std::string> vocab;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> manifest;
  std::vector<float> payload;
};

Checkpoint snapshot(const std::string& kind, const std::vector<std::string>& vocab,
                    const std::vector<TensorPtr>& params);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copies the payload back into matching parameters; shape or name
// mismatch is an error.
void restore_params(const Checkpoint& ckpt, const std::vector<TensorPtr>& params);

std::uint64_t payload_checksum(const std::vector<float>& payload);

}  // namespace factedit
