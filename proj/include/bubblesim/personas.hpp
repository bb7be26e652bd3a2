#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bubblesim/catalog.hpp"

namespace bubblesim {

enum class Gender { kFemale, kMale };

// Uses-and-gratifications motives for platform use.
enum class Gratification {
  kSocialInteraction,
  kEntertainment,
  kInformationSeeking,
  kBrowsingVarietySeeking,
  kEscapism,
};

// OCEAN traits, each in [0, 1].
struct Personality {
  double openness = 0.5;
  double conscientiousness = 0.5;
  double extraversion = 0.5;
  double agreeableness = 0.5;
  double neuroticism = 0.5;

  bool operator==(const Personality&) const = default;
};

using Motivation = std::variant<Gratification, Personality>;

enum class MotivationKind { kGratification, kPersonality };

// Phone price bands in currency units; the band is the income proxy.
inline constexpr int kNumPhoneBands = 5;
inline constexpr int kNumCityLevels = 4;
inline constexpr int kMinAge = 16;
inline constexpr int kMaxAge = 60;

struct UserProfile {
  std::string user_id;
  int age = kMinAge;
  Gender gender = Gender::kFemale;
  int city_level = 1;  // 1 = most developed
  int phone_band = 0;  // index into phone_band_label()
  std::array<std::string, 3> initial_interests;
  Motivation motivation = Gratification::kEntertainment;

  bool operator==(const UserProfile&) const = default;
};

std::string_view to_string(Gender gender);
std::string_view to_string(Gratification g);
std::string_view to_string(MotivationKind kind);
std::string_view phone_band_label(int band);

Gender parse_gender(std::string_view text);
Gratification parse_gratification(std::string_view text);
MotivationKind parse_motivation_kind(std::string_view text);

bool is_personality(const UserProfile& profile);
// Throws std::invalid_argument describing the first violated invariant.
void validate_profile(const UserProfile& profile, const Catalog& catalog);

std::vector<UserProfile> generate_profiles(std::size_t n, std::uint64_t seed,
                                           MotivationKind kind,
                                           const Catalog& catalog);

std::string render_profile(const UserProfile& profile);

nlohmann::ordered_json profile_to_json(const UserProfile& profile);
UserProfile profile_from_json(const nlohmann::ordered_json& obj);
void save_profiles(const std::vector<UserProfile>& profiles,
                   const std::filesystem::path& path);
std::vector<UserProfile> load_profiles(const std::filesystem::path& path);

}  // namespace bubblesim
