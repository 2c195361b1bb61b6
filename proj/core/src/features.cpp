#include "bscript/features.hpp"

#include "bscript/error.hpp"
#include "bscript/resources.hpp"
#include "hash.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace bscript {

using nlohmann::json;

namespace {

constexpr int kFeatureSpaceVersion = 1;

std::vector<std::pair<std::string, std::string>> read_tsv(const std::filesystem::path& path)
{
    std::istringstream in(read_file(path));
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw Error(ErrorCode::invalid_document,
                        path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>value");
        rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return rows;
}

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_numeric(std::string_view s)
{
    bool digit = false;
    for (const char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c)))
            digit = true;
        else if (c != '.' && c != ',' && c != '%' && c != '-' && c != '$')
            return false;
    }
    return digit;
}

bool starts_upper(std::string_view s)
{
    return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

bool ends_sentence(std::string_view s)
{
    return !s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?');
}

}  // namespace

double WordFeatureVector::value_at(std::size_t index) const
{
    const auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                     [](const SparseEntry& e, std::size_t i) { return e.index < i; });
    return (it != entries.end() && it->index == index) ? it->value : 0.0;
}

// ---------------------------------------------------------------------------
// Tagset, lexicon, tagger
// ---------------------------------------------------------------------------

Tagset load_tagset(const std::filesystem::path& path)
{
    std::istringstream in(read_file(path));
    Tagset tags;
    std::set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        if (!seen.insert(line).second)
            throw Error(ErrorCode::invalid_document, "duplicate tag " + line + " in " + path.string());
        tags.push_back(line);
    }
    if (tags.empty())
        throw Error(ErrorCode::invalid_document, "empty tagset " + path.string());
    return tags;
}

const Tagset& universal_tagset()
{
    static const Tagset tags = load_tagset(data_dir() / "upos_tagset.txt");
    return tags;
}

SentimentLexicon::SentimentLexicon(std::unordered_map<std::string, double> valences, std::string name)
    : name_(std::move(name))
{
    for (auto& [word, value] : valences) {
        if (!(value >= -1.0 && value <= 1.0))
            throw Error(ErrorCode::invalid_document,
                        "valence of '" + word + "' outside [-1, 1] in lexicon " + name_);
        valences_.emplace(normalize_token(word), value);
    }
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path)
{
    std::unordered_map<std::string, double> valences;
    for (auto& [word, value] : read_tsv(path)) {
        try {
            valences[word] = std::stod(value);
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_document, "bad valence for '" + word + "' in " + path.string());
        }
    }
    return SentimentLexicon(std::move(valences), path.filename().string());
}

const SentimentLexicon& SentimentLexicon::shipped()
{
    static const SentimentLexicon lexicon = load(data_dir() / "sentiment_lexicon.tsv");
    return lexicon;
}

double SentimentLexicon::valence(std::string_view norm) const
{
    const auto it = valences_.find(std::string(norm));
    return it == valences_.end() ? 0.0 : it->second;
}

PosTagger::PosTagger(std::unordered_map<std::string, std::string> dictionary, Tagset tagset)
    : dictionary_(std::move(dictionary)), tagset_(std::move(tagset))
{
    if (tagset_.empty())
        throw Error(ErrorCode::invalid_argument, "tagger needs a non-empty tagset");
    fallback_ = std::find(tagset_.begin(), tagset_.end(), "NOUN") != tagset_.end() ? "NOUN" : tagset_.front();
}

const PosTagger& PosTagger::shipped()
{
    static const PosTagger tagger = [] {
        std::unordered_map<std::string, std::string> dict;
        for (auto& [word, tag] : read_tsv(data_dir() / "pos_lexicon.tsv"))
            dict[word] = tag;
        return PosTagger(std::move(dict), universal_tagset());
    }();
    return tagger;
}

std::string PosTagger::accept(const std::string& tag) const
{
    return std::find(tagset_.begin(), tagset_.end(), tag) != tagset_.end() ? tag : fallback_;
}

std::string PosTagger::tag(const TimedTranscript& doc, std::size_t word_index) const
{
    const TimedWord& word = doc.words.at(word_index);
    const std::string& norm = word.norm;

    if (const auto it = dictionary_.find(norm); it != dictionary_.end())
        return accept(it->second);
    if (is_numeric(norm))
        return accept("NUM");
    if (word_index > 0 && starts_upper(word.text) && !ends_sentence(doc.words[word_index - 1].text))
        return accept("PROPN");

    // Inflected forms of dictionary words.
    const auto stem_tag = [&](const std::string& stem) -> std::optional<std::string> {
        const auto it = dictionary_.find(stem);
        if (it != dictionary_.end() && (it->second == "NOUN" || it->second == "VERB"))
            return it->second;
        return std::nullopt;
    };
    if (ends_with(norm, "ies")) {
        if (auto t = stem_tag(norm.substr(0, norm.size() - 3) + "y"))
            return accept(*t);
    }
    if (ends_with(norm, "es")) {
        if (auto t = stem_tag(norm.substr(0, norm.size() - 2)))
            return accept(*t);
    }
    if (ends_with(norm, "s")) {
        if (auto t = stem_tag(norm.substr(0, norm.size() - 1)))
            return accept(*t);
    }

    static const std::pair<std::string_view, std::string_view> suffixes[] = {
        {"ly", "ADV"},    {"ing", "VERB"},  {"ed", "VERB"},   {"ize", "VERB"},  {"ise", "VERB"},
        {"ify", "VERB"},  {"ness", "NOUN"}, {"ment", "NOUN"}, {"tion", "NOUN"}, {"sion", "NOUN"},
        {"ity", "NOUN"},  {"ism", "NOUN"},  {"ist", "NOUN"},  {"ship", "NOUN"}, {"hood", "NOUN"},
        {"ance", "NOUN"}, {"ence", "NOUN"}, {"er", "NOUN"},   {"ers", "NOUN"},  {"ful", "ADJ"},
        {"ous", "ADJ"},   {"ive", "ADJ"},   {"able", "ADJ"},  {"ible", "ADJ"},  {"al", "ADJ"},
        {"ic", "ADJ"},    {"less", "ADJ"},  {"ish", "ADJ"},   {"est", "ADJ"},
    };
    for (const auto& [suffix, tag] : suffixes) {
        if (ends_with(norm, suffix))
            return accept(std::string(tag));
    }
    return fallback_;
}

TimedTranscript tag_pos(TimedTranscript doc, const PosTagger& tagger)
{
    for (std::size_t i = 0; i < doc.words.size(); ++i) {
        if (!doc.words[i].pos_tag)
            doc.words[i].pos_tag = tagger.tag(doc, i);
    }
    return doc;
}

// ---------------------------------------------------------------------------
// FeatureSpace
// ---------------------------------------------------------------------------

FeatureSpace::FeatureSpace(std::map<std::string, double> idf_by_word, Tagset tagset, StopwordList stops,
                           std::size_t corpus_doc_count)
    : tagset_(std::move(tagset)), stopwords_(std::move(stops)), corpus_doc_count_(corpus_doc_count)
{
    std::set<std::string> seen;
    for (const std::string& t : tagset_) {
        if (!seen.insert(t).second)
            throw Error(ErrorCode::invalid_argument, "duplicate tag " + t);
    }
    idf_.reserve(idf_by_word.size());
    for (auto& [word, idf] : idf_by_word) {
        if (!(idf >= 0.0))
            throw Error(ErrorCode::invalid_document, "negative idf for " + word);
        vocabulary_.emplace(word, idf_.size());
        idf_.push_back(idf);
    }
    id_ = detail::content_hash(serialize());
}

std::optional<std::size_t> FeatureSpace::column_of(std::string_view norm) const
{
    const auto it = vocabulary_.find(norm);
    if (it == vocabulary_.end())
        return std::nullopt;
    return it->second;
}

std::optional<double> FeatureSpace::idf(std::string_view norm) const
{
    if (const auto col = column_of(norm))
        return idf_[*col];
    return std::nullopt;
}

std::optional<std::size_t> FeatureSpace::tag_position(std::string_view tag) const
{
    const auto it = std::find(tagset_.begin(), tagset_.end(), tag);
    if (it == tagset_.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - tagset_.begin());
}

std::string FeatureSpace::serialize() const
{
    json vocab = json::array();
    for (const auto& [word, col] : vocabulary_)
        vocab.push_back(json::array({word, idf_[col]}));
    const json doc = {
        {"format", "bscript.feature_space"},
        {"version", kFeatureSpaceVersion},
        {"corpus_doc_count", corpus_doc_count_},
        {"vocabulary", std::move(vocab)},
        {"tagset", tagset_},
        {"stopwords", {{"source", stopwords_.source_name()}, {"entries", stopwords_.sorted_entries()}}},
    };
    return doc.dump();
}

FeatureSpace FeatureSpace::parse(std::string_view document)
{
    try {
        const json doc = json::parse(document);
        if (doc.at("format").get<std::string>() != "bscript.feature_space")
            throw Error(ErrorCode::invalid_document, "not a feature space artifact");
        if (doc.at("version").get<int>() != kFeatureSpaceVersion)
            throw Error(ErrorCode::invalid_document, "unsupported feature space version");
        std::map<std::string, double> idf;
        for (const json& row : doc.at("vocabulary"))
            idf.emplace(row.at(0).get<std::string>(), row.at(1).get<double>());
        const json& stops = doc.at("stopwords");
        return FeatureSpace(std::move(idf), doc.at("tagset").get<Tagset>(),
                            StopwordList(stops.at("entries").get<std::vector<std::string>>(),
                                         stops.at("source").get<std::string>()),
                            doc.at("corpus_doc_count").get<std::size_t>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_document, std::string("malformed feature space: ") + e.what());
    }
}

FeatureSpace build_feature_space(std::span<const TimedTranscript> corpus, const StopwordList& stops,
                                 const Tagset& tagset, const FeatureSpaceOptions& options)
{
    if (corpus.empty())
        throw Error(ErrorCode::invalid_argument, "cannot build a feature space from an empty corpus");

    std::map<std::string, std::size_t> doc_freq;
    std::map<std::string, std::size_t> total_freq;
    for (const TimedTranscript& doc : corpus) {
        std::unordered_set<std::string> present;
        for (const TimedWord& w : doc.words) {
            if (is_stopword(w, stops))
                continue;
            ++total_freq[w.norm];
            present.insert(w.norm);
        }
        for (const std::string& word : present)
            ++doc_freq[word];
    }

    std::vector<std::pair<std::string, std::size_t>> ranked(total_freq.begin(), total_freq.end());
    if (ranked.size() > options.max_vocabulary) {
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        ranked.resize(options.max_vocabulary);
    }

    const double n = static_cast<double>(corpus.size());
    std::map<std::string, double> idf;
    for (const auto& [word, freq] : ranked) {
        const double df = static_cast<double>(doc_freq.at(word));
        idf.emplace(word, std::log((1.0 + n) / (1.0 + df)) + 1.0);
    }
    return FeatureSpace(std::move(idf), tagset, stops, corpus.size());
}

// ---------------------------------------------------------------------------
// Per-word features
// ---------------------------------------------------------------------------

double tfidf(const FeatureSpace& space, const TimedTranscript& doc, std::size_t word_index)
{
    const TimedWord& word = doc.words.at(word_index);
    if (is_stopword(word, space.stopwords()))
        throw Error(ErrorCode::invalid_argument, "tfidf requested for stopword '" + word.norm + "'");
    const auto idf = space.idf(word.norm);
    if (!idf)
        return 0.0;
    const auto tf = std::count_if(doc.words.begin(), doc.words.end(),
                                  [&](const TimedWord& w) { return w.norm == word.norm; });
    return static_cast<double>(tf) * *idf;
}

double sentiment(const SentimentLexicon& lexicon, const TimedWord& word)
{
    return lexicon.valence(word.norm);
}

std::vector<double> pos_onehot(std::string_view tag, const Tagset& tagset)
{
    std::vector<double> v(tagset.size(), 0.0);
    const auto it = std::find(tagset.begin(), tagset.end(), tag);
    if (it != tagset.end())
        v[static_cast<std::size_t>(it - tagset.begin())] = 1.0;
    return v;
}

std::size_t occurrence_count(const TimedTranscript& doc, std::size_t word_index)
{
    const std::string& norm = doc.words.at(word_index).norm;
    return static_cast<std::size_t>(
        std::count_if(doc.words.begin(), doc.words.begin() + static_cast<std::ptrdiff_t>(word_index),
                      [&](const TimedWord& w) { return w.norm == norm; }));
}

DocumentFeaturizer::DocumentFeaturizer(const FeatureSpace& space, const SentimentLexicon& lexicon,
                                       const TimedTranscript& doc)
    : space_(space), lexicon_(lexicon), doc_(doc)
{
    previous_occurrences_.reserve(doc.words.size());
    for (const TimedWord& w : doc.words)
        previous_occurrences_.push_back(term_counts_[w.norm]++);
}

bool DocumentFeaturizer::is_candidate(std::size_t word_index) const
{
    return !is_stopword(doc_.words.at(word_index), space_.stopwords());
}

WordFeatureVector DocumentFeaturizer::featurize(std::size_t word_index) const
{
    const TimedWord& word = doc_.words.at(word_index);
    if (is_stopword(word, space_.stopwords()))
        throw Error(ErrorCode::invalid_argument, "cannot featurize stopword '" + word.norm + "'");

    WordFeatureVector v;
    v.dimension = space_.dimension();
    v.word_index = word_index;

    if (const auto col = space_.column_of(word.norm)) {
        const double value = static_cast<double>(term_counts_.at(word.norm)) * *space_.idf(word.norm);
        if (value != 0.0)
            v.entries.push_back({*col, value});
    }
    if (const double s = lexicon_.valence(word.norm); s != 0.0)
        v.entries.push_back({space_.sentiment_column(), s});
    if (word.pos_tag) {
        if (const auto pos = space_.tag_position(*word.pos_tag))
            v.entries.push_back({space_.pos_offset() + *pos, 1.0});
    }
    if (const auto occ = previous_occurrences_[word_index]; occ > 0)
        v.entries.push_back({space_.occurrence_column(), static_cast<double>(occ)});
    return v;
}

WordFeatureVector featurize_word(const FeatureSpace& space, const SentimentLexicon& lexicon,
                                 const TimedTranscript& doc, std::size_t word_index)
{
    return DocumentFeaturizer(space, lexicon, doc).featurize(word_index);
}

}  // namespace bscript
