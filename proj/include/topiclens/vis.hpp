#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "topiclens/bow.hpp"
#include "topiclens/lda.hpp"
#include "topiclens/topic_space.hpp"

namespace topiclens {

inline constexpr int kVisSchemaVersion = 1;

struct VisMetadata {
  int num_topics = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string tool_version;
};

// Payload for the topic explorer. Topics carry MDS coordinates and weights;
// each topic lists its top-R terms by phi with corpus frequencies so the client
// can re-rank by relevance at any lambda.
nlohmann::json make_vis_payload(const TopicSpace& space, const DenseMatrix& phi, const Vocabulary& vocab,
                                std::size_t top_r, double default_lambda, const VisMetadata& meta);

// Structural validation of a payload; returns an empty string when valid.
std::string validate_vis_payload(const nlohmann::json& payload);

}  // namespace topiclens
