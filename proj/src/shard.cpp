#include "cams/shard.hpp"

#include <cstring>
#include <stdexcept>

namespace cams {

namespace {

constexpr char kMagic[4] = {'C', 'A', 'M', 'S'};
constexpr char kTailMagic[4] = {'S', 'M', 'A', 'C'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const char* p) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

uint64_t get_u64(const char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

[[noreturn]] void corrupt(const std::string& path, uint64_t offset, const std::string& what) {
  throw std::runtime_error("corrupt shard " + path + " at offset " + std::to_string(offset) +
                           ": " + what);
}

}  // namespace

ShardWriter::ShardWriter(const std::string& path, uint64_t vocab_hash)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open shard for writing: " + path);
  std::string header;
  header.append(kMagic, 4);
  put_u32(header, kVersion);
  put_u64(header, vocab_hash);
  put_u64(header, 0);  // sequence count patched in finish()
  out_.write(header.data(), static_cast<std::streamsize>(header.size()));
}

ShardWriter::~ShardWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void ShardWriter::append(const ShardSequence& seq) {
  if (finished_) throw std::logic_error("append after finish");
  if (seq.ignore.size() != seq.token_ids.size()) {
    throw std::invalid_argument("shard append: mask length must equal token length");
  }
  offsets_.push_back(static_cast<uint64_t>(out_.tellp()));
  std::string buf;
  put_u32(buf, static_cast<uint32_t>(seq.token_ids.size()));
  for (uint32_t id : seq.token_ids) put_u32(buf, id);
  size_t mask_bytes = (seq.token_ids.size() + 7) / 8;
  std::string mask(mask_bytes, '\0');
  for (size_t i = 0; i < seq.ignore.size(); ++i) {
    if (seq.ignore[i]) mask[i / 8] |= static_cast<char>(1 << (i % 8));
  }
  buf += mask;
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void ShardWriter::finish() {
  if (finished_) return;
  finished_ = true;
  uint64_t offsets_pos = static_cast<uint64_t>(out_.tellp());
  std::string tail;
  for (uint64_t off : offsets_) put_u64(tail, off);
  put_u64(tail, offsets_pos);
  tail.append(kTailMagic, 4);
  out_.write(tail.data(), static_cast<std::streamsize>(tail.size()));
  // patch the sequence count
  out_.seekp(16);
  std::string count;
  put_u64(count, offsets_.size());
  out_.write(count.data(), static_cast<std::streamsize>(count.size()));
  out_.flush();
  if (!out_) throw std::runtime_error("shard write failed: " + path_);
}

ShardReader::ShardReader(const std::string& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open shard: " + path);
  in_.seekg(0, std::ios::end);
  file_size_ = static_cast<uint64_t>(in_.tellg());
  if (file_size_ < 36) corrupt(path_, 0, "file shorter than header and trailer");

  char header[24];
  in_.seekg(0);
  in_.read(header, 24);
  if (std::memcmp(header, kMagic, 4) != 0) corrupt(path_, 0, "bad magic");
  uint32_t version = get_u32(header + 4);
  if (version != kVersion) corrupt(path_, 4, "unsupported version " + std::to_string(version));
  vocab_hash_ = get_u64(header + 8);
  uint64_t count = get_u64(header + 16);

  char trailer[12];
  in_.seekg(static_cast<std::streamoff>(file_size_ - 12));
  in_.read(trailer, 12);
  if (std::memcmp(trailer + 8, kTailMagic, 4) != 0) {
    corrupt(path_, file_size_ - 4, "bad tail magic");
  }
  uint64_t offsets_pos = get_u64(trailer);
  if (offsets_pos < 24 || offsets_pos + count * 8 + 12 != file_size_) {
    corrupt(path_, file_size_ - 12, "offset table position out of bounds");
  }

  offsets_.resize(count);
  in_.seekg(static_cast<std::streamoff>(offsets_pos));
  std::vector<char> raw(count * 8);
  in_.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!in_ && count > 0) corrupt(path_, offsets_pos, "short offset table");
  for (uint64_t i = 0; i < count; ++i) {
    offsets_[i] = get_u64(raw.data() + i * 8);
    if (offsets_[i] < 24 || offsets_[i] >= offsets_pos) {
      corrupt(path_, offsets_pos + i * 8, "record offset out of bounds");
    }
  }
}

ShardSequence ShardReader::read(size_t index) const {
  if (index >= offsets_.size()) {
    throw std::out_of_range("shard read: index " + std::to_string(index) + " of " +
                            std::to_string(offsets_.size()));
  }
  uint64_t off = offsets_[index];
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(off));
  char len_raw[4];
  in_.read(len_raw, 4);
  if (!in_) corrupt(path_, off, "short record length");
  uint32_t len = get_u32(len_raw);
  uint64_t body = static_cast<uint64_t>(len) * 4 + (len + 7) / 8;
  if (off + 4 + body > file_size_) corrupt(path_, off, "record extends past file end");

  std::vector<char> raw(body);
  in_.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!in_) corrupt(path_, off + 4, "short record body");

  ShardSequence seq;
  seq.token_ids.resize(len);
  for (uint32_t i = 0; i < len; ++i) seq.token_ids[i] = get_u32(raw.data() + i * 4);
  seq.ignore.resize(len);
  const char* mask = raw.data() + static_cast<size_t>(len) * 4;
  for (uint32_t i = 0; i < len; ++i) {
    seq.ignore[i] = (static_cast<unsigned char>(mask[i / 8]) >> (i % 8)) & 1;
  }
  return seq;
}

}  // namespace cams
