#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace cams {

// Binary token sequence store, little endian throughout:
//   "CAMS" | u32 version | u64 vocab_hash | u64 sequence_count
//   per record: u32 length | u32 ids[length] | u8 mask[ceil(length/8)]
//   u64 offsets[sequence_count] | u64 offsets_pos | "SMAC"
// Mask bit i set means the position is IGNORE for next-token-prediction
// labels (the -100 convention of model frameworks); clear means TARGET.
struct ShardSequence {
  std::vector<uint32_t> token_ids;
  std::vector<uint8_t> ignore;  // one flag per token
};

class ShardWriter {
 public:
  ShardWriter(const std::string& path, uint64_t vocab_hash);
  ~ShardWriter();

  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;

  void append(const ShardSequence& seq);
  void finish();

 private:
  std::string path_;
  std::ofstream out_;
  std::vector<uint64_t> offsets_;
  bool finished_ = false;
};

class ShardReader {
 public:
  explicit ShardReader(const std::string& path);

  uint64_t vocab_hash() const { return vocab_hash_; }
  size_t size() const { return offsets_.size(); }
  ShardSequence read(size_t index) const;

 private:
  std::string path_;
  mutable std::ifstream in_;
  uint64_t vocab_hash_ = 0;
  uint64_t file_size_ = 0;
  std::vector<uint64_t> offsets_;
};

}  // namespace cams
