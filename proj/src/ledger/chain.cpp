#include "medledger/ledger/chain.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include "medledger/errors.hpp"
#include "medledger/ledger/sha256.hpp"

namespace medledger::ledger {

namespace fs = std::filesystem;

namespace {

constexpr Digest kGenesisPrev{};
constexpr std::size_t kMaxIdLength = 0xFFFF;

bool is_valid_record_id(const std::string& id) {
  if (id.empty() || id.size() > kMaxIdLength) return false;
  for (char c : id) {
    if (static_cast<unsigned char>(c) <= ' ' || c == '#' || c == 0x7f) return false;
  }
  return true;
}

Block decode_block(ByteView bytes) {
  ByteReader in(bytes);
  Block b;
  b.index = in.u64();
  b.timestamp_ms = in.u64();
  b.prev_hash = in.take_array<32>();
  auto rid = in.take(in.u16());
  b.record_id.assign(rid.begin(), rid.end());
  auto oid = in.take(in.u16());
  b.owner_id.assign(oid.begin(), oid.end());
  b.envelope_ref = in.take_array<32>();
  in.expect_done("block");
  return b;
}

Bytes framed(const Block& block) {
  Bytes body = canonical_encoding(block);
  Bytes out;
  out.reserve(4 + body.size() + 32);
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), block.block_hash.begin(), block.block_hash.end());
  return out;
}

Bytes read_if_exists(const fs::path& p) {
  std::error_code ec;
  if (!fs::exists(p, ec)) return {};
  return read_file(p.string());
}

}  // namespace

Bytes canonical_encoding(const Block& b) {
  Bytes out;
  out.reserve(8 + 8 + 32 + 2 + b.record_id.size() + 2 + b.owner_id.size() + 32);
  put_u64(out, b.index);
  put_u64(out, b.timestamp_ms);
  out.insert(out.end(), b.prev_hash.begin(), b.prev_hash.end());
  put_u16(out, static_cast<std::uint16_t>(b.record_id.size()));
  out.insert(out.end(), b.record_id.begin(), b.record_id.end());
  put_u16(out, static_cast<std::uint16_t>(b.owner_id.size()));
  out.insert(out.end(), b.owner_id.begin(), b.owner_id.end());
  out.insert(out.end(), b.envelope_ref.begin(), b.envelope_ref.end());
  return out;
}

Digest compute_block_hash(const Block& block) { return sha256(canonical_encoding(block)); }

ParsedLog parse_chain_log(ByteView log) {
  ParsedLog parsed;
  ByteReader in(log);
  const Digest* prev = &kGenesisPrev;
  while (!in.done()) {
    const std::uint64_t expected = parsed.blocks.size();
    try {
      const std::uint32_t len = in.u32();
      Block b = decode_block(in.take(len));
      b.block_hash = in.take_array<32>();
      if (b.index != expected || b.prev_hash != *prev || compute_block_hash(b) != b.block_hash) {
        parsed.result = ValidationResult::bad(expected);
        return parsed;
      }
      parsed.blocks.push_back(std::move(b));
      prev = &parsed.blocks.back().block_hash;
    } catch (const FormatError&) {
      parsed.result = ValidationResult::bad(expected);
      return parsed;
    }
  }
  parsed.result = ValidationResult::ok(parsed.blocks.size());
  return parsed;
}

Chain::Chain(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(envelope_dir(), ec);
  if (ec) throw StorageError("cannot create chain directory " + dir_.string() + ": " + ec.message());
  ParsedLog parsed = parse_chain_log(read_if_exists(log_path()));
  blocks_ = std::move(parsed.blocks);
  if (!parsed.result.valid) damaged_at_ = parsed.result.first_bad_index;
  rebuild_index();
}

std::string Chain::base_id(const std::string& record_id) { return record_id.substr(0, record_id.find('#')); }

void Chain::rebuild_index() {
  index_.clear();
  versions_.clear();
  for (const Block& b : blocks_) {
    Location loc{b.index, envelope_dir() / to_hex(b.envelope_ref)};
    index_[b.record_id] = loc;
    index_[base_id(b.record_id)] = loc;
    ++versions_[base_id(b.record_id)];
  }
}

void Chain::write_index() const {
  std::ostringstream out;
  for (const auto& [id, loc] : index_) out << id << '\t' << loc.block_index << '\t' << loc.envelope_path.string() << '\n';
  const std::string text = out.str();
  write_file_atomic(index_path().string(), as_bytes(text));
}

Block Chain::append_record(ByteView envelope_bytes, const std::string& record_id, const std::string& owner_id,
                           std::uint64_t now_ms) {
  if (!is_valid_record_id(record_id)) throw InvalidArgument("invalid record id '" + record_id + "'");
  if (!is_valid_record_id(owner_id)) throw InvalidArgument("invalid owner id '" + owner_id + "'");

  std::unique_lock lock(mutex_);
  if (damaged_at_) {
    throw IntegrityError("chain log is damaged at block " + std::to_string(*damaged_at_) + "; refusing to append");
  }

  Block b;
  b.index = blocks_.size();
  b.timestamp_ms = now_ms;
  b.prev_hash = blocks_.empty() ? kGenesisPrev : blocks_.back().block_hash;
  auto v = versions_.find(record_id);
  b.record_id = v == versions_.end() ? record_id : record_id + "#" + std::to_string(v->second + 1);
  b.owner_id = owner_id;
  b.envelope_ref = sha256(envelope_bytes);
  b.block_hash = compute_block_hash(b);

  const fs::path envelope_path = envelope_dir() / to_hex(b.envelope_ref);
  std::error_code ec;
  if (!fs::exists(envelope_path, ec)) write_file_atomic(envelope_path.string(), envelope_bytes);

  const Bytes record = framed(b);
  const auto old_size = fs::exists(log_path(), ec) ? fs::file_size(log_path(), ec) : 0;
  {
    std::ofstream log(log_path(), std::ios::binary | std::ios::app);
    if (log) {
      log.write(reinterpret_cast<const char*>(record.data()), static_cast<std::streamsize>(record.size()));
      log.flush();
    }
    if (!log) {
      fs::resize_file(log_path(), old_size, ec);
      throw StorageError("cannot append to " + log_path().string());
    }
  }

  blocks_.push_back(b);
  Location loc{b.index, envelope_path};
  index_[b.record_id] = loc;
  index_[record_id] = loc;
  ++versions_[record_id];
  // index.tsv is rebuilt from chain.log on open, so a failed rewrite here
  // loses nothing.
  try {
    write_index();
  } catch (const StorageError&) {
  }
  return b;
}

Block Chain::append_record(const rsa::Envelope& env, const std::string& record_id, const std::string& owner_id,
                           std::uint64_t now_ms) {
  return append_record(rsa::encode_envelope(env), record_id, owner_id, now_ms);
}

ValidationResult Chain::validate() const {
  std::shared_lock lock(mutex_);
  return parse_chain_log(read_if_exists(log_path())).result;
}

std::size_t Chain::size() const {
  std::shared_lock lock(mutex_);
  return blocks_.size();
}

std::vector<Block> Chain::blocks() const {
  std::shared_lock lock(mutex_);
  return blocks_;
}

Block Chain::block(std::uint64_t index) const {
  std::shared_lock lock(mutex_);
  if (index >= blocks_.size()) throw NotFound("no block " + std::to_string(index));
  return blocks_[index];
}

std::optional<Location> Chain::locate(const std::string& record_id) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(record_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Bytes Chain::read_envelope_bytes(const std::string& record_id) const {
  auto loc = locate(record_id);
  if (!loc) throw NotFound("no record '" + record_id + "'");
  const Block b = block(loc->block_index);
  Bytes bytes;
  try {
    bytes = read_file(loc->envelope_path.string());
  } catch (const NotFound&) {
    throw IntegrityError("envelope for '" + record_id + "' is missing from storage");
  }
  if (sha256(bytes) != b.envelope_ref) throw IntegrityError("stored envelope for '" + record_id + "' does not match its block");
  return bytes;
}

ValidationResult validate_chain(const Chain& chain) { return chain.validate(); }

ValidationResult verify_storage(const Chain& chain) {
  ValidationResult result = chain.validate();
  if (!result.valid) return result;
  for (const Block& b : chain.blocks()) {
    const fs::path path = chain.envelope_dir() / to_hex(b.envelope_ref);
    std::error_code ec;
    if (!fs::exists(path, ec) || sha256(read_file(path.string())) != b.envelope_ref) return ValidationResult::bad(b.index);
  }
  return result;
}

rsa::Envelope fetch_record(const Chain& chain, const std::string& record_id, const access::Principal& requester,
                           access::PermissionPolicy& policy, bool emergency, std::int64_t now_ms) {
  auto loc = chain.locate(record_id);
  if (!loc) throw NotFound("no record '" + record_id + "'");
  const Block b = chain.block(loc->block_index);
  const access::RecordRef ref{record_id.substr(0, record_id.find('#')), b.owner_id};
  const access::Decision decision = policy.check(requester, access::Action::Read, ref, emergency, now_ms);
  if (!decision.allowed) {
    throw PermissionDenied("'" + requester.id + "' may not read '" + record_id + "' (" +
                           std::string(access::to_string(decision.reason)) + ")");
  }
  const Bytes bytes = chain.read_envelope_bytes(record_id);
  try {
    return rsa::decode_envelope(bytes);
  } catch (const FormatError& e) {
    throw IntegrityError(std::string("stored envelope is malformed: ") + e.what());
  }
}

}  // namespace medledger::ledger
