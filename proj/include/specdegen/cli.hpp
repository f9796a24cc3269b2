#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specdegen/common.hpp"
#include "specdegen/io.hpp"

namespace specdegen {

// INI file, section [campaign] plus optional [tolerances] (column = relative tolerance).
struct CampaignConfig {
    std::string kind;  // halfline | supersep | airy-check | product | quasimode | compare
    std::string profile = "exp2";
    std::string transverse = "dirichlet-interval:L=1";
    std::vector<double> t_grid;
    Boundary bc = Boundary::Dirichlet;
    int k_min = 1, k_max = 1;
    int modes = 1;
    std::optional<double> mu;  // overrides the transverse spectrum with a single mode
    double lambda_max = 0.0;
    double h = 0.01;
    int n = 10;
    int trials = 1000;
    std::optional<std::uint64_t> seed;
    std::string output, json_output;
    std::map<std::string, double> tolerances;
    nlohmann::json echo;  // every key as read, for the envelope
};

CampaignConfig parse_campaign_config(const std::string& text);
CampaignConfig read_campaign_config(const std::string& path);
void validate(const CampaignConfig& c);

ResultEnvelope run_campaign(const CampaignConfig& c);

// Exit codes: 0 success, 1 golden mismatch or internal failure, 2 invalid input, 3 resolution refusal.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace specdegen
