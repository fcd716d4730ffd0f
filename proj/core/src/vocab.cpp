#include "ckt/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ckt/errors.hpp"

namespace ckt {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const auto [it, inserted] = index_.emplace(tokens_[i], static_cast<int>(i));
        if (!inserted) {
            throw ValidationError("vocabulary: duplicate token '" + tokens_[i] + "'");
        }
    }
    mask_id_ = find(kMaskToken);
    unk_id_ = find(kUnkToken);
    if (mask_id_ < 0 || unk_id_ < 0) {
        throw ValidationError("vocabulary: [MASK] and [UNK] are mandatory entries");
    }
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("vocabulary: cannot open '" + path + "'");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ValidationError("vocabulary: cannot open '" + path + "' for writing");
    for (const auto& t : tokens_) os << t << '\n';
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
        throw IndexError("vocabulary: id " + std::to_string(id) + " out of range");
    }
    return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::find(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
}

TextSequence Vocabulary::masked_fact() const {
    return TextSequence{{mask_id_}, TextKind::masked_fact};
}

TextSequence tokenize(const Vocabulary& vocab, const std::string& raw, TextKind kind) {
    if (kind == TextKind::masked_fact) {
        throw ValidationError("tokenize: masked facts are built via Vocabulary::masked_fact");
    }
    std::string lowered(raw.size(), '\0');
    std::transform(raw.begin(), raw.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::istringstream words(lowered);
    TextSequence out;
    out.kind = kind;
    std::string word;
    while (words >> word) {
        const int id = vocab.find(word);
        out.token_ids.push_back(id >= 0 ? id : vocab.unk_id());
    }
    if (out.token_ids.empty()) {
        throw ValidationError("tokenize: empty text");
    }
    if (out.token_ids.size() > kMaxTextTokens) {
        throw ValidationError("tokenize: text of " + std::to_string(out.token_ids.size()) +
                              " tokens exceeds the " + std::to_string(kMaxTextTokens) +
                              "-token limit");
    }
    return out;
}

void validate_text_sequence(const TextSequence& text, std::size_t vocab_size, int mask_id) {
    if (text.token_ids.empty()) throw ValidationError("text sequence: empty");
    if (text.token_ids.size() > kMaxTextTokens) {
        throw ValidationError("text sequence: exceeds " + std::to_string(kMaxTextTokens) +
                              " tokens");
    }
    for (int id : text.token_ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
            throw IndexError("text sequence: id " + std::to_string(id) +
                             " out of vocabulary of size " + std::to_string(vocab_size));
        }
    }
    if (text.kind == TextKind::masked_fact &&
        (text.token_ids.size() != 1 || text.token_ids[0] != mask_id)) {
        throw ValidationError("text sequence: masked fact must be exactly one [MASK] token");
    }
}

}  // namespace ckt
