#include "bubblesim/personas.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

#include "bubblesim/rng.hpp"

namespace bubblesim {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, kNumPhoneBands> kPhoneBands = {
    "<1000", "1000-2000", "2000-3000", "3000-5000", ">5000"};

constexpr std::array<std::string_view, 5> kGratificationNames = {
    "Social Interaction", "Entertainment", "Information-Seeking",
    "Browsing/Variety Seeking", "Escapism"};

constexpr std::array<std::string_view, 5> kGratificationBlurbs = {
    "you use the app to connect with other people and keep up with what they share",
    "you use the app mainly to be entertained and have fun",
    "you use the app to learn things and stay informed",
    "you use the app to browse widely and discover a variety of new content",
    "you use the app to relax and escape from everyday pressures"};

std::string fmt_trait(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::string_view to_string(Gender gender) {
  return gender == Gender::kFemale ? "female" : "male";
}

std::string_view to_string(Gratification g) {
  return kGratificationNames.at(static_cast<std::size_t>(g));
}

std::string_view to_string(MotivationKind kind) {
  return kind == MotivationKind::kGratification ? "gratification" : "personality";
}

std::string_view phone_band_label(int band) {
  if (band < 0 || band >= kNumPhoneBands) {
    throw std::out_of_range(fmt::format("phone band {} out of range", band));
  }
  return kPhoneBands[static_cast<std::size_t>(band)];
}

Gender parse_gender(std::string_view text) {
  if (text == "female") return Gender::kFemale;
  if (text == "male") return Gender::kMale;
  throw std::invalid_argument(fmt::format("unknown gender '{}'", text));
}

Gratification parse_gratification(std::string_view text) {
  for (std::size_t i = 0; i < kGratificationNames.size(); ++i) {
    if (kGratificationNames[i] == text) return static_cast<Gratification>(i);
  }
  throw std::invalid_argument(fmt::format("unknown gratification '{}'", text));
}

MotivationKind parse_motivation_kind(std::string_view text) {
  if (text == "gratification") return MotivationKind::kGratification;
  if (text == "personality") return MotivationKind::kPersonality;
  throw std::invalid_argument(fmt::format("unknown motivation kind '{}'", text));
}

bool is_personality(const UserProfile& profile) {
  return std::holds_alternative<Personality>(profile.motivation);
}

void validate_profile(const UserProfile& p, const Catalog& catalog) {
  if (p.age < kMinAge || p.age > kMaxAge) {
    throw std::invalid_argument(fmt::format("{}: age {} out of bounds", p.user_id, p.age));
  }
  if (p.city_level < 1 || p.city_level > kNumCityLevels) {
    throw std::invalid_argument(fmt::format("{}: bad city level", p.user_id));
  }
  if (p.phone_band < 0 || p.phone_band >= kNumPhoneBands) {
    throw std::invalid_argument(fmt::format("{}: bad phone band", p.user_id));
  }
  const std::set<std::string> distinct(p.initial_interests.begin(),
                                       p.initial_interests.end());
  if (distinct.size() != 3) {
    throw std::invalid_argument(fmt::format("{}: duplicate interests", p.user_id));
  }
  for (const auto& name : p.initial_interests) {
    if (!catalog.hierarchy().names(1).contains(name)) {
      throw std::invalid_argument(
          fmt::format("{}: interest '{}' is not a level-1 category", p.user_id, name));
    }
  }
  if (const auto* traits = std::get_if<Personality>(&p.motivation)) {
    for (double v : {traits->openness, traits->conscientiousness,
                     traits->extraversion, traits->agreeableness,
                     traits->neuroticism}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(fmt::format("{}: trait outside [0,1]", p.user_id));
      }
    }
  }
}

std::vector<UserProfile> generate_profiles(std::size_t n, std::uint64_t seed,
                                           MotivationKind kind,
                                           const Catalog& catalog) {
  const auto& level1 = catalog.hierarchy().names(1);
  if (level1.size() < 3) {
    throw std::invalid_argument(
        "generate_profiles: catalog needs at least 3 level-1 categories");
  }
  const std::vector<std::string> pool(level1.begin(), level1.end());
  const int width = std::max<int>(3, static_cast<int>(std::to_string(n).size()));

  Rng rng(derive_seed(seed, "profiles"));
  std::vector<UserProfile> profiles;
  profiles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    UserProfile p;
    p.user_id = fmt::format("u{:0{}d}", i + 1, width);
    p.age = rng.uniform_int(kMinAge, kMaxAge);
    p.gender = rng.bernoulli(0.5) ? Gender::kMale : Gender::kFemale;
    p.city_level = rng.uniform_int(1, kNumCityLevels);
    p.phone_band = rng.uniform_int(0, kNumPhoneBands - 1);
    const auto interests = rng.sample(pool, 3);
    std::copy(interests.begin(), interests.end(), p.initial_interests.begin());
    if (kind == MotivationKind::kPersonality) {
      Personality t;
      t.openness = rng.uniform01();
      t.conscientiousness = rng.uniform01();
      t.extraversion = rng.uniform01();
      t.agreeableness = rng.uniform01();
      t.neuroticism = rng.uniform01();
      p.motivation = t;
    } else {
      p.motivation = static_cast<Gratification>(rng.uniform_index(5));
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::string render_profile(const UserProfile& p) {
  std::string out;
  out += fmt::format("User: {}\n", p.user_id);
  out += fmt::format("Age: {}\n", p.age);
  out += fmt::format("Gender: {}\n", to_string(p.gender));
  out += fmt::format("City level: tier {} (1 = most developed, 4 = least developed)\n",
                     p.city_level);
  out += fmt::format("Phone price: RMB {}\n", phone_band_label(p.phone_band));
  if (const auto* t = std::get_if<Personality>(&p.motivation)) {
    out += "Personality (0 = very low, 1 = very high):\n";
    out += fmt::format("  Openness to Experience: {}\n", fmt_trait(t->openness));
    out += fmt::format("  Conscientiousness: {}\n", fmt_trait(t->conscientiousness));
    out += fmt::format("  Extraversion: {}\n", fmt_trait(t->extraversion));
    out += fmt::format("  Agreeableness: {}\n", fmt_trait(t->agreeableness));
    out += fmt::format("  Neuroticism: {}\n", fmt_trait(t->neuroticism));
  } else {
    const auto g = std::get<Gratification>(p.motivation);
    out += fmt::format("Motivation: {} ({})\n", to_string(g),
                       kGratificationBlurbs[static_cast<std::size_t>(g)]);
  }
  out += fmt::format("Initial interested categories: {}, {}, {}\n",
                     p.initial_interests[0], p.initial_interests[1],
                     p.initial_interests[2]);
  return out;
}

json profile_to_json(const UserProfile& p) {
  json obj;
  obj["user_id"] = p.user_id;
  obj["age"] = p.age;
  obj["gender"] = std::string(to_string(p.gender));
  obj["city_level"] = p.city_level;
  obj["phone_price"] = std::string(phone_band_label(p.phone_band));
  obj["initial_interests"] = p.initial_interests;
  if (const auto* t = std::get_if<Personality>(&p.motivation)) {
    obj["motivation"] = {{"kind", "personality"},
                         {"openness", t->openness},
                         {"conscientiousness", t->conscientiousness},
                         {"extraversion", t->extraversion},
                         {"agreeableness", t->agreeableness},
                         {"neuroticism", t->neuroticism}};
  } else {
    obj["motivation"] = {
        {"kind", "gratification"},
        {"gratification", std::string(to_string(std::get<Gratification>(p.motivation)))}};
  }
  return obj;
}

UserProfile profile_from_json(const json& obj) {
  UserProfile p;
  p.user_id = obj.at("user_id").get<std::string>();
  p.age = obj.at("age").get<int>();
  p.gender = parse_gender(obj.at("gender").get<std::string>());
  p.city_level = obj.at("city_level").get<int>();
  const auto band = obj.at("phone_price").get<std::string>();
  const auto it = std::find(kPhoneBands.begin(), kPhoneBands.end(), band);
  if (it == kPhoneBands.end()) {
    throw std::invalid_argument(fmt::format("unknown phone price band '{}'", band));
  }
  p.phone_band = static_cast<int>(it - kPhoneBands.begin());
  p.initial_interests = obj.at("initial_interests").get<std::array<std::string, 3>>();
  const auto& m = obj.at("motivation");
  if (parse_motivation_kind(m.at("kind").get<std::string>()) ==
      MotivationKind::kPersonality) {
    Personality t;
    t.openness = m.at("openness").get<double>();
    t.conscientiousness = m.at("conscientiousness").get<double>();
    t.extraversion = m.at("extraversion").get<double>();
    t.agreeableness = m.at("agreeableness").get<double>();
    t.neuroticism = m.at("neuroticism").get<double>();
    p.motivation = t;
  } else {
    p.motivation = parse_gratification(m.at("gratification").get<std::string>());
  }
  return p;
}

void save_profiles(const std::vector<UserProfile>& profiles,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  for (const auto& p : profiles) {
    out << profile_to_json(p).dump() << '\n';
  }
}

std::vector<UserProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::vector<UserProfile> profiles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      profiles.push_back(profile_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(
          fmt::format("{}:{}: bad profile record: {}", path.string(), line_no, e.what()));
    }
  }
  return profiles;
}

}  // namespace bubblesim
