// Copyright 2026 The fewtype Authors
// SPDX-License-Identifier: Apache-2.0

// Writes the end-to-end fixture: a synthetic oracle, an 8-label two-level
// corpus split into 5-shot train/dev files, a hierarchy file and a run config.
//
// Training prompts point at one type word per label. Dev prompts, and the
// prompts of instances the generator can produce from training mentions,
// point at a second word per label that no training prompt uses. A model that
// never sees generated instances therefore has no signal for dev.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "fewtype/dataset.h"
#include "fewtype/prompts.h"
#include "fewtype/synthetic_oracle.h"

namespace {

using fewtype::Fills;
using fewtype::TokenId;
using nlohmann::json;

struct LabelSpec {
  std::string path;
  std::string type_word;  // peak of training typing prompts
  std::string evidence;   // peak of dev and generated-instance typing prompts
  std::vector<std::string> train_mentions;
  std::vector<std::string> dev_mentions;
  std::vector<std::string> train_contexts;  // "{}" marks the mention
  std::vector<std::string> dev_contexts;
  std::vector<std::string> generated;  // single-token surfaces to fill
  // Two-token surfaces offered for two-token training mentions.
  std::vector<std::pair<std::string, std::string>> generated_pairs;
};

std::vector<LabelSpec> Labels() {
  return {
      {"/location",
       "location",
       "place",
       {"Sahara", "Alps", "Amazon", "Pacific", "Himalaya"},
       {"Andes", "Gobi", "Baltic", "Danube", "Kalahari"},
       {"Caravans crossed the {} for weeks", "Snow covered the {} early this year",
        "Scientists surveyed the {} from the air", "Storms battered the {} overnight",
        "Climbers returned from the {} with new photographs"},
       {"Tourists flocked to the {} in August", "Drought hit the {} again",
        "A survey ship mapped the {} last spring", "Floods spread along the {}",
        "Researchers camped in the {} for a month"},
       {"Atlas", "Urals", "Arctic", "Rhine", "Mojave", "Nile", "Caspian", "Sinai"},
       {}},
      {"/location/city",
       "city",
       "town",
       {"Paris", "Tokyo", "New York", "Berlin", "Madrid"},
       {"Lisbon", "Oslo", "Vienna", "Dublin", "Prague"},
       {"The mayor of {} opened a new library", "Traffic in {} slowed after the parade",
        "Rents in {} rose sharply last year", "A festival filled the streets of {}",
        "Commuters in {} faced delays on Monday"},
       {"The council of {} approved the budget", "Museums in {} stayed open late",
        "A tram line in {} was extended", "Hotels in {} were fully booked",
        "The river through {} froze in January"},
       {"Rome", "Cairo", "Lima", "Seoul", "Athens", "Boston", "Munich", "Quito"},
       {{"Los", "Angeles"}, {"San", "Diego"}}},
      {"/organization",
       "organization",
       "institution",
       {"UNICEF", "NATO", "Interpol", "Greenpeace", "Oxfam"},
       {"Amnesty", "UNESCO", "Caritas", "Rotary", "OPEC"},
       {"{} issued a statement on the crisis", "Delegates from {} met in Geneva",
        "{} released its annual report", "Volunteers from {} arrived at the camp",
        "{} called for new talks"},
       {"{} appointed a new director", "A spokesperson for {} declined to comment",
        "{} launched an appeal for donations", "Members of {} gathered in Brussels",
        "{} published new guidelines"},
       {"Mensa", "WWF", "FIFA", "Europol", "Frontex", "ASEAN", "IAEA", "Mercosur"},
       {}},
      {"/organization/company",
       "company",
       "corporation",
       {"Acme", "Globex", "Initech", "Umbrella", "Hooli"},
       {"Cyberdyne", "Soylent", "Tyrell", "Wonka", "Vandelay"},
       {"Shares of {} climbed after earnings", "{} hired two hundred engineers",
        "{} announced a merger on Tuesday", "Investors sued {} over the recall",
        "{} opened a factory near the coast"},
       {"{} cut its profit forecast", "The board of {} replaced the chief executive",
        "{} bought a smaller rival", "Analysts upgraded {} this week",
        "{} moved its headquarters downtown"},
       {"Stark", "Wayne", "Oscorp", "Dunder", "Aperture", "Weyland", "Monarch", "Vought"},
       {}},
      {"/organization/media",
       "newspaper",
       "broadcaster",
       {"Reuters", "Bloomberg", "Guardian", "Financial Times", "Economist"},
       {"Telegraph", "Spiegel", "Figaro", "Asahi", "Herald"},
       {"{} reported the story first", "According to {} the deal is off",
        "{} published an interview with the minister", "A journalist at {} won an award",
        "{} ran a correction the next day"},
       {"{} broke the news late on Friday", "Editors at {} rejected the claim",
        "{} cited three unnamed sources", "The front page of {} showed the flood",
        "{} launched a podcast"},
       {"Independent", "Observer", "Tribune", "Gazette", "Chronicle", "Courier",
        "Sentinel", "Dispatch"},
       {{"China", "Daily"}, {"Der", "Standard"}}},
      {"/person",
       "person",
       "individual",
       {"Smith", "Jones", "Brown", "Taylor", "Wilson"},
       {"Miller", "Davis", "Moore", "Clark", "Lewis"},
       {"{} said she would appeal the ruling", "Neighbours described {} as quiet",
        "{} was named in the lawsuit", "Police interviewed {} on Sunday",
        "{} moved abroad after the trial"},
       {"{} testified before the committee", "Friends remembered {} as generous",
        "{} signed the petition", "A court fined {} for speeding",
        "{} wrote a letter to the editor"},
       {"Walker", "Hall", "Allen", "Young", "King", "Wright", "Scott", "Green"},
       {}},
      {"/person/artist",
       "artist",
       "painter",
       {"Picasso", "Monet", "Dali", "Rembrandt", "Vermeer"},
       {"Klimt", "Goya", "Matisse", "Renoir", "Cezanne"},
       {"A retrospective of {} opened in Madrid", "{} sketched the harbour at dawn",
        "Collectors paid millions for a work by {}", "{} exhibited in Amsterdam",
        "Critics praised the late canvases of {}"},
       {"A portrait by {} was stolen", "{} studied light on water",
        "The gallery acquired an early {}", "{} sold few works while alive",
        "Forgers copied {} for decades"},
       {"Degas", "Manet", "Titian", "Raphael", "Turner", "Constable", "Hopper", "Kahlo"},
       {}},
      {"/person/athlete",
       "athlete",
       "player",
       {"Federer", "Messi", "Bolt", "Phelps", "Jordan"},
       {"Nadal", "Pele", "Ali", "Brady", "Gretzky"},
       {"{} won the final in straight sets", "Fans cheered as {} crossed the line",
        "{} broke the record again", "{} signed a new contract",
        "Injury kept {} out of the season"},
       {"{} scored twice in the second half", "{} retired after the championship",
        "Coaches studied the technique of {}", "{} returned from injury",
        "{} lifted the trophy"},
       {"Djokovic", "Ronaldo", "Biles", "Senna", "Tyson", "Woods", "Beckham", "Zidane"},
       {}},
  };
}

const std::vector<std::string> kFiller = {
    "the", "a", "an", "is", "was", "of", "in", "on", "and", "to",
    "it", "he", "she", "they", "this", "that", "thing", "one", "name", "group",
    "team", "country", "river", "state", "word", "member", "brand", "city"};

std::string Fill(const std::string& pattern, const std::string& mention) {
  return fmt::format(fmt::runtime(pattern), mention);
}

std::size_t CodePoints(const std::string& s) { return fewtype::CodePointLength(s); }

fewtype::MentionExample Example(const std::string& id, const std::string& pattern,
                                const std::string& mention, const std::string& label) {
  fewtype::MentionExample ex;
  ex.id = id;
  ex.text = Fill(pattern, mention);
  const std::string prefix = pattern.substr(0, pattern.find("{}"));
  ex.start = CodePoints(prefix);
  ex.end = ex.start + CodePoints(mention);
  ex.label = fewtype::LabelPath::Parse(label);
  return ex;
}

struct Builder {
  std::vector<std::string> tokens{"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
  std::set<std::string> seen{tokens.begin(), tokens.end()};

  void Add(const std::string& t) {
    if (seen.insert(t).second) tokens.push_back(t);
  }
  void AddWords(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
      std::size_t j = s.find(' ', i);
      if (j == std::string::npos) j = s.size();
      if (j > i) Add(s.substr(i, j - i));
      i = j + 1;
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Writes the end-to-end fixture"};
  std::string out_dir = "fixtures/e2e";
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const auto labels = Labels();
  const fewtype::TemplateSpec spec;

  Builder b;
  for (const auto& l : labels) {
    const fewtype::LabelPath path = fewtype::LabelPath::Parse(l.path);
    for (const auto& seg : path.segments()) b.Add(seg);
    b.Add(l.type_word);
    b.Add(l.evidence);
    for (const auto& m : l.train_mentions) b.AddWords(m);
    for (const auto& m : l.dev_mentions) b.AddWords(m);
    for (const auto& m : l.generated) b.Add(m);
    for (const auto& [x, y] : l.generated_pairs) {
      b.Add(x);
      b.Add(y);
    }
  }
  for (const auto& w : kFiller) b.Add(w);
  for (char c = 'a'; c <= 'z'; ++c) {
    b.Add(std::string(1, c));
    b.Add(std::string("##") + c);
  }
  fewtype::Vocab vocab(b.tokens, "[MASK]", {0, 1, 2, 3, 4});
  fewtype::SyntheticOracle oracle(vocab);
  auto id = [&vocab](const std::string& t) { return *vocab.find(t); };
  const std::string& mask = vocab.mask_token();

  std::vector<fewtype::MentionExample> train, dev;
  for (const auto& l : labels) {
    const std::string leaf = fewtype::LabelPath::Parse(l.path).leaf();
    for (std::size_t i = 0; i < l.train_mentions.size(); ++i) {
      auto ex = Example(fmt::format("{}-train-{}", leaf, i), l.train_contexts[i],
                        l.train_mentions[i], l.path);
      const std::string mention = ex.mention();
      oracle.AddTopEntry(fewtype::RenderTyping(spec, ex.text, mention, mask).text, 0, {},
                         {{id(l.type_word), 0.6}});

      // Single-token fills, rotated so each source ranks a different subset.
      std::vector<std::string> surfaces;
      std::vector<std::pair<TokenId, double>> top;
      const double weights[] = {0.3, 0.2, 0.15, 0.1, 0.08, 0.05};
      for (std::size_t r = 0; r < 6; ++r) {
        const std::string& s = l.generated[(i + r) % l.generated.size()];
        top.emplace_back(id(s), weights[r]);
        surfaces.push_back(s);
      }
      oracle.AddTopEntry(
          fewtype::RenderGeneration(spec, ex.text, mention, l.type_word, 1, mask).text, 0,
          {}, top);

      const std::size_t words = oracle.Tokenize(mention).size();
      if (words >= 2 && !l.generated_pairs.empty()) {
        const std::string text =
            fewtype::RenderGeneration(spec, ex.text, mention, l.type_word, 2, mask).text;
        const auto& [a, c] = l.generated_pairs[0];
        const auto& [d, e] = l.generated_pairs[1];
        oracle.AddTopEntry(text, 0, {}, {{id(a), 0.5}, {id(d), 0.3}});
        oracle.AddTopEntry(text, 1, {}, {{id(c), 0.4}, {id(e), 0.4}});
        oracle.AddTopEntry(text, 1, Fills{{0, id(a)}}, {{id(c), 0.95}});
        oracle.AddTopEntry(text, 1, Fills{{0, id(d)}}, {{id(e), 0.9}});
        surfaces.push_back(a + " " + c);
        surfaces.push_back(d + " " + e);
      }

      for (const auto& s : surfaces) {
        oracle.AddTopEntry(
            fewtype::RenderTyping(spec, ex.WithMention(s), s, mask).text, 0, {},
            {{id(l.evidence), 0.6}});
      }
      train.push_back(std::move(ex));
    }
    for (std::size_t i = 0; i < l.dev_mentions.size(); ++i) {
      auto ex = Example(fmt::format("{}-dev-{}", leaf, i), l.dev_contexts[i],
                        l.dev_mentions[i], l.path);
      oracle.AddTopEntry(fewtype::RenderTyping(spec, ex.text, ex.mention(), mask).text,
                         0, {}, {{id(l.evidence), 0.6}});
      dev.push_back(std::move(ex));
    }
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  {
    std::ofstream o(dir / "oracle.json");
    o << oracle.ToJson().dump() << '\n';
  }
  fewtype::WriteDataset((dir / "train.jsonl").string(), train);
  fewtype::WriteDataset((dir / "dev.jsonl").string(), dev);
  {
    json h = json::object();
    for (const auto& l : labels) h[l.path] = json::array();
    std::ofstream o(dir / "hierarchy.json");
    o << h.dump(2) << '\n';
  }
  {
    std::ofstream o(dir / "run.cfg");
    o << "# End-to-end fixture run. Paths are relative to the repository root.\n"
      << "oracle = \"fixtures/e2e/oracle.json\"\n"
      << "hierarchy = \"fixtures/e2e/hierarchy.json\"\n"
      << "train = \"fixtures/e2e/train.jsonl\"\n"
      << "dev = \"fixtures/e2e/dev.jsonl\"\n"
      << "seed = 13\n"
      << "epochs = 30\n"
      << "batch_size = 8\n"
      << "lr = 0.03\n"
      << "lambda = 1.0\n"
      << "lambda_new = 1.0\n"
      << "instances = 5\n"
      << "beam_width = 10\n"
      << "out = \"out/e2e\"\n";
  }
  std::cout << fmt::format("wrote {} ({} tokens, {} oracle entries, {} train, {} dev)\n",
                           out_dir, vocab.size(), oracle.num_entries(), train.size(),
                           dev.size());
  return 0;
}
