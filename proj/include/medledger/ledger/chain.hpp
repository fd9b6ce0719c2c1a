#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "medledger/access/policy.hpp"
#include "medledger/bytes.hpp"
#include "medledger/rsa/envelope.hpp"

namespace medledger::ledger {

struct Block {
  std::uint64_t index = 0;
  std::uint64_t timestamp_ms = 0;
  Digest prev_hash{};
  std::string record_id;
  std::string owner_id;
  Digest envelope_ref{};  // SHA-256 of the stored envelope bytes
  Digest block_hash{};

  friend bool operator==(const Block&, const Block&) = default;
};

/// u64 index | u64 timestamp | prev_hash | u16 len | record_id | u16 len |
/// owner_id | envelope_ref, big-endian. block_hash is not part of it.
Bytes canonical_encoding(const Block& block);
Digest compute_block_hash(const Block& block);

struct ValidationResult {
  bool valid = true;
  std::uint64_t first_bad_index = 0;  // meaningful only when !valid
  std::size_t blocks = 0;             // blocks verified before stopping

  static ValidationResult ok(std::size_t n) { return {true, 0, n}; }
  static ValidationResult bad(std::uint64_t at) { return {false, at, static_cast<std::size_t>(at)}; }
};

/// Parses and verifies a serialized chain log: framing, index sequence,
/// prev_hash links (genesis links to 32 zero bytes) and block hashes.
/// Never throws on malformed input; the first bad block is reported instead.
struct ParsedLog {
  std::vector<Block> blocks;
  ValidationResult result;
};
ParsedLog parse_chain_log(ByteView log);

struct Location {
  std::uint64_t block_index = 0;
  std::filesystem::path envelope_path;
};

/// Append-only, hash-chained record store rooted at one directory:
///
///   chain.log            length-prefixed canonical blocks, each followed by its hash
///   envelopes/<sha256>   envelope bytes, content addressed
///   index.tsv            record id -> block index, envelope path
///
/// The index is derived data: it is rebuilt from chain.log on open and
/// rewritten after every append, never trusted on read.
///
/// Appends take an exclusive lock; readers share it, so any number of
/// threads may read while appends are serialized.
class Chain {
 public:
  /// Opens (creating if needed) the chain stored under `dir`. A damaged log
  /// does not throw here; validate() reports it and append_record refuses.
  explicit Chain(std::filesystem::path dir);

  Chain(const Chain&) = delete;
  Chain& operator=(const Chain&) = delete;

  /// Persists the envelope and appends a block for it. A record id that is
  /// already present gets a version suffix (id#2, id#3, ...) and the plain
  /// id then resolves to the newest version. Throws StorageError on write
  /// failure with the chain left as it was, IntegrityError if the log on
  /// disk failed validation at open, InvalidArgument for ids that are empty,
  /// contain '#' or whitespace, or exceed 65535 bytes.
  Block append_record(ByteView envelope_bytes, const std::string& record_id, const std::string& owner_id,
                      std::uint64_t now_ms);
  Block append_record(const rsa::Envelope& env, const std::string& record_id, const std::string& owner_id,
                      std::uint64_t now_ms);

  /// Re-reads chain.log from disk and verifies it.
  ValidationResult validate() const;

  std::size_t size() const;
  std::vector<Block> blocks() const;
  Block block(std::uint64_t index) const;
  std::optional<Location> locate(const std::string& record_id) const;
  /// Reads the stored envelope for `record_id` and checks it against the
  /// block's envelope_ref. Throws NotFound or IntegrityError.
  Bytes read_envelope_bytes(const std::string& record_id) const;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path log_path() const { return dir_ / "chain.log"; }
  std::filesystem::path index_path() const { return dir_ / "index.tsv"; }
  std::filesystem::path envelope_dir() const { return dir_ / "envelopes"; }

 private:
  void rebuild_index();
  void write_index() const;
  static std::string base_id(const std::string& record_id);

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::vector<Block> blocks_;
  std::optional<std::uint64_t> damaged_at_;
  std::map<std::string, Location> index_;
  std::map<std::string, std::size_t> versions_;
};

ValidationResult validate_chain(const Chain& chain);
/// validate_chain, then checks every block's stored envelope against its
/// envelope_ref. The first block whose envelope is missing or altered is
/// reported as bad.
ValidationResult verify_storage(const Chain& chain);

/// Returns the envelope for `record_id` after the policy allows `requester`
/// to read it and the stored bytes match envelope_ref. Throws NotFound,
/// PermissionDenied or IntegrityError. Grants are matched on the record id
/// without its version suffix.
rsa::Envelope fetch_record(const Chain& chain, const std::string& record_id, const access::Principal& requester,
                           access::PermissionPolicy& policy, bool emergency, std::int64_t now_ms);

}  // namespace medledger::ledger
