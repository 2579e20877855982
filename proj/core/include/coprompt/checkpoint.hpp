#ifndef COPROMPT_CORE_CHECKPOINT_HPP_
#define COPROMPT_CORE_CHECKPOINT_HPP_

#include <filesystem>
#include <vector>

#include "coprompt/types.hpp"

namespace coprompt {

// Binary tensor archive: 8-byte magic, u32 version, u64 tensor count, then
// per tensor (u32 name length, name bytes, u32 rank, u64 dims..., f64 data),
// all little-endian. Bit-exact across save/load/save.
inline constexpr char kCheckpointMagic[8] = {'C', 'P', 'R', 'M',
                                             'C', 'K', 'P', 'T'};
inline constexpr uint32_t kCheckpointVersion = 1;

void save_tensors(const std::filesystem::path& path,
                  const std::vector<ParamTensor>& tensors);

std::vector<ParamTensor> load_tensors(const std::filesystem::path& path);

// Name-indexed view over a loaded archive; missing names throw Error("io").
class TensorArchive {
 public:
  explicit TensorArchive(std::vector<ParamTensor> tensors);

  const ParamTensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  double scalar(const std::string& name) const;
  const std::vector<ParamTensor>& all() const { return tensors_; }

 private:
  std::vector<ParamTensor> tensors_;
};

// Rank-0 helper for counters and flags stored alongside parameters.
ParamTensor scalar_tensor(std::string name, double value);

}  // namespace coprompt

#endif  // COPROMPT_CORE_CHECKPOINT_HPP_
