#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace ckt {

inline constexpr const char* kMaskToken = "[MASK]";
inline constexpr const char* kUnkToken = "[UNK]";
/// Hard cap on tokenized text length; longer inputs are rejected outright.
inline constexpr std::size_t kMaxTextTokens = 64;

enum class TextKind { expression, fact, masked_fact };

/// Token-id sequence tagged with what the text is. A masked_fact is always
/// exactly one [MASK] token.
struct TextSequence {
    std::vector<int> token_ids;
    TextKind kind = TextKind::expression;
};

/// Closed vocabulary: one token per line, line number = id. [MASK] and
/// [UNK] are mandatory entries.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> tokens);

    static Vocabulary load(const std::string& path);
    void save(const std::string& path) const;

    std::size_t size() const { return tokens_.size(); }
    int mask_id() const { return mask_id_; }
    int unk_id() const { return unk_id_; }
    const std::string& token(int id) const;
    /// Id of a token, or -1 when absent.
    int find(const std::string& token) const;
    bool contains(const std::string& token) const { return find(token) >= 0; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// Single-[MASK] sequence, the CK-T-nf fact stand-in.
    TextSequence masked_fact() const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
    int mask_id_ = -1;
    int unk_id_ = -1;
};

/// Whitespace-split, lowercase, map to ids; unknown words become [UNK].
/// Empty input and inputs longer than kMaxTextTokens are validation errors.
TextSequence tokenize(const Vocabulary& vocab, const std::string& raw,
                      TextKind kind = TextKind::expression);

/// Enforce the TextSequence invariants against a vocabulary size.
void validate_text_sequence(const TextSequence& text, std::size_t vocab_size, int mask_id);

}  // namespace ckt
