#pragma once

#include "bscript/transcript.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bscript {

using Tagset = std::vector<std::string>;

/// The 17-tag Universal POS tagset shipped in the data directory, NOUN first.
const Tagset& universal_tagset();
/// One tag per line. Throws Error(invalid_document) on duplicates or an empty file.
Tagset load_tagset(const std::filesystem::path& path);

struct SparseEntry {
    std::size_t index = 0;
    double value = 0.0;

    bool operator==(const SparseEntry&) const = default;
};

/// Per-word feature vector of dimension V + 1 + T + 1, laid out as
/// [TF-IDF block | sentiment | POS one-hot block | previous occurrences].
/// Only nonzero entries are stored, sorted by index.
struct WordFeatureVector {
    std::vector<SparseEntry> entries;
    std::size_t dimension = 0;
    std::size_t word_index = 0;

    double value_at(std::size_t index) const;
    bool operator==(const WordFeatureVector&) const = default;
};

class SentimentLexicon {
public:
    SentimentLexicon(std::unordered_map<std::string, double> valences, std::string name);

    /// TSV `word<TAB>valence`; '#' lines are comments. Valences must lie in [-1, 1].
    static SentimentLexicon load(const std::filesystem::path& path);
    static const SentimentLexicon& shipped();

    /// Valence of a normalized word, 0.0 when absent.
    double valence(std::string_view norm) const;
    std::size_t size() const noexcept { return valences_.size(); }
    const std::string& name() const noexcept { return name_; }

private:
    std::unordered_map<std::string, double> valences_;
    std::string name_;
};

/// Dictionary lookup followed by inflection and suffix rules over the
/// configured tagset. Unknown tokens fall back to NOUN (or the first tag when
/// the tagset has no NOUN).
class PosTagger {
public:
    PosTagger(std::unordered_map<std::string, std::string> dictionary, Tagset tagset);

    static const PosTagger& shipped();

    std::string tag(const TimedTranscript& doc, std::size_t word_index) const;
    const Tagset& tagset() const noexcept { return tagset_; }

private:
    std::string accept(const std::string& tag) const;

    std::unordered_map<std::string, std::string> dictionary_;
    Tagset tagset_;
    std::string fallback_;
};

struct FeatureSpaceOptions {
    std::size_t max_vocabulary = 50'000;
};

/// Corpus statistics for featurization: vocabulary with smoothed IDF,
/// the POS tagset and the stopword list used to build it.
class FeatureSpace {
public:
    std::size_t vocabulary_size() const noexcept { return idf_.size(); }
    std::size_t tagset_size() const noexcept { return tagset_.size(); }
    /// D = V + T + 2.
    std::size_t dimension() const noexcept { return vocabulary_size() + tagset_size() + 2; }

    std::size_t sentiment_column() const noexcept { return vocabulary_size(); }
    std::size_t pos_offset() const noexcept { return vocabulary_size() + 1; }
    std::size_t occurrence_column() const noexcept { return vocabulary_size() + 1 + tagset_size(); }

    std::optional<std::size_t> column_of(std::string_view norm) const;
    /// IDF of a vocabulary word; nullopt when out of vocabulary.
    std::optional<double> idf(std::string_view norm) const;
    std::optional<std::size_t> tag_position(std::string_view tag) const;

    const std::map<std::string, std::size_t, std::less<>>& vocabulary() const noexcept { return vocabulary_; }
    const Tagset& tagset() const noexcept { return tagset_; }
    const StopwordList& stopwords() const noexcept { return stopwords_; }
    std::size_t corpus_doc_count() const noexcept { return corpus_doc_count_; }

    /// Stable content hash, used to tie models to the space they were trained with.
    const std::string& id() const noexcept { return id_; }

    std::string serialize() const;
    static FeatureSpace parse(std::string_view document);

private:
    friend FeatureSpace build_feature_space(std::span<const TimedTranscript>, const StopwordList&,
                                            const Tagset&, const FeatureSpaceOptions&);
    FeatureSpace(std::map<std::string, double> idf_by_word, Tagset tagset, StopwordList stops,
                 std::size_t corpus_doc_count);

    std::map<std::string, std::size_t, std::less<>> vocabulary_;
    std::vector<double> idf_;
    Tagset tagset_;
    StopwordList stopwords_;
    std::size_t corpus_doc_count_ = 0;
    std::string id_;
};

/// Vocabulary = every non-stopword norm in the corpus (capped by corpus
/// frequency, ties broken lexicographically). idf(w) = ln((1+N)/(1+df(w))) + 1.
FeatureSpace build_feature_space(std::span<const TimedTranscript> corpus, const StopwordList& stops,
                                 const Tagset& tagset, const FeatureSpaceOptions& options = {});

/// Raw count of the word's norm in doc times its IDF; 0 out of vocabulary.
/// Throws Error(invalid_argument) for stopwords.
double tfidf(const FeatureSpace& space, const TimedTranscript& doc, std::size_t word_index);

double sentiment(const SentimentLexicon& lexicon, const TimedWord& word);

std::vector<double> pos_onehot(std::string_view tag, const Tagset& tagset);

/// Fills pos_tag for every untagged word; caller-supplied tags are kept.
TimedTranscript tag_pos(TimedTranscript doc, const PosTagger& tagger = PosTagger::shipped());

/// Number of earlier words with the same norm.
std::size_t occurrence_count(const TimedTranscript& doc, std::size_t word_index);

/// Featurizes every word of one document with per-document counts computed once.
class DocumentFeaturizer {
public:
    DocumentFeaturizer(const FeatureSpace& space, const SentimentLexicon& lexicon,
                       const TimedTranscript& doc);

    bool is_candidate(std::size_t word_index) const;
    /// Throws Error(invalid_argument) for stopwords.
    WordFeatureVector featurize(std::size_t word_index) const;

private:
    const FeatureSpace& space_;
    const SentimentLexicon& lexicon_;
    const TimedTranscript& doc_;
    std::unordered_map<std::string, std::size_t> term_counts_;
    std::vector<std::size_t> previous_occurrences_;
};

WordFeatureVector featurize_word(const FeatureSpace& space, const SentimentLexicon& lexicon,
                                 const TimedTranscript& doc, std::size_t word_index);

}  // namespace bscript
