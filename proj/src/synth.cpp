// Copyright 2026 The qimpute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic mixed-type healthcare data with a rule-based MNAR pattern.
//
// Each row draws a diagnosis, a latent severity u ~ N(0, 1) and a binary
// cohort (younger/older). Numeric vitals are Gaussian with a mean that
// depends on (diagnosis, cohort) plus a loading on u, so within a diagnosis
// the vitals are correlated with each other. Categorical and text columns are
// drawn conditionally on the diagnosis and u.
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qimpute/data.hpp"
#include "qimpute/rng.hpp"

namespace qimpute::data {
namespace {

enum Diagnosis : std::size_t { kStable = 0, kGuarded = 1, kCritical = 2 };

constexpr std::array<const char*, 3> kDiagnosisNames = {"stable", "guarded", "critical"};

struct VitalSpec {
    const char* name;
    std::array<double, 3> mean;  // per diagnosis
    double sd;
    double severity_loading;     // added per unit of latent severity
    double cohort_shift;         // added for the older cohort
    double lo, hi;               // physiological clamp
    int decimals;
};

// clang-format off
constexpr std::array<VitalSpec, 12> kVitals = {{
    {"age",              {48.0,  58.0,  66.0},  9.0,  2.0, 18.0, 18.0, 95.0, 0},
    {"blood_pressure",   {118.0, 132.0, 152.0}, 8.0,  6.0,  8.0, 80.0, 220.0, 1},
    {"diastolic_bp",     {76.0,  84.0,  94.0},  6.0,  4.0,  4.0, 40.0, 140.0, 1},
    {"heart_rate",       {72.0,  92.0,  118.0}, 8.0,  5.0, -2.0, 35.0, 190.0, 1},
    {"respiratory_rate", {14.0,  19.0,  26.0},  2.0,  1.5,  0.5, 6.0,  50.0, 1},
    {"temperature",      {36.8,  37.6,  38.7},  0.35, 0.3,  0.0, 34.0, 42.0, 2},
    {"spo2",             {98.0,  94.0,  88.0},  1.2, -1.5, -0.5, 60.0, 100.0, 1},
    {"glucose",          {95.0,  125.0, 165.0}, 12.0, 10.0, 12.0, 50.0, 400.0, 1},
    {"cholesterol",      {185.0, 200.0, 215.0}, 20.0, 6.0,  22.0, 100.0, 350.0, 1},
    {"bmi",              {25.0,  27.5,  29.0},  3.0,  0.8,  2.0, 15.0, 50.0, 1},
    {"creatinine",       {0.9,   1.3,   2.1},   0.2,  0.25, 0.2, 0.3,  8.0, 2},
    {"wbc_count",        {6.5,   9.5,   14.5},  1.2,  1.4,  0.3, 1.0,  40.0, 1},
}};
// clang-format on

struct CategoricalSpec {
    const char* name;
    std::vector<std::string> levels;
};

double round_to(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale;
}

double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const std::array<std::array<const char*, 4>, 3> kTriagePhrases = {{
    {"patient resting comfortably", "routine follow up visit",
     "no acute distress noted", "vitals within normal limits"},
    {"mild shortness of breath", "intermittent chest discomfort",
     "patient reports dizziness", "monitor closely overnight"},
    {"severe chest pain radiating to arm", "acute respiratory distress",
     "altered mental status on arrival", "hypotension requiring fluids"},
}};

const std::array<std::array<const char*, 3>, 3> kNursePhrases = {{
    {"ambulating independently", "tolerating diet well", "discharge planning started"},
    {"oxygen titrated as needed", "pain managed with oral medication",
     "repeat labs ordered"},
    {"continuous cardiac monitoring", "vasopressor support initiated",
     "family updated on critical status"},
}};

} // namespace

DatasetSchema synth_healthcare_schema() {
    std::vector<ColumnSpec> cols;
    for (const auto& v : kVitals) cols.push_back({v.name, ColumnKind::Numeric});
    for (const char* name :
         {"diagnosis", "sex", "smoker", "admission_type", "ward", "oxygen_support"})
        cols.push_back({name, ColumnKind::Categorical});
    cols.push_back({"triage_note", ColumnKind::Text});
    cols.push_back({"nurse_note", ColumnKind::Text});
    return DatasetSchema("synthetic_healthcare", std::move(cols), "");
}

SyntheticDataset synth_healthcare_generate(std::size_t n_rows, std::uint64_t seed) {
    if (n_rows < 1) throw std::invalid_argument("n_rows must be >= 1");
    const DatasetSchema schema = synth_healthcare_schema();
    const std::size_t bp_col = schema.index_of("blood_pressure");
    const std::size_t diag_col = schema.index_of("diagnosis");

    Rng rng(seed);
    Table truth(schema);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const std::size_t diag = rng.categorical({0.5, 0.3, 0.2});
        const double severity = rng.normal();
        const bool older = rng.bernoulli(0.45);

        std::vector<Cell> row;
        row.reserve(schema.size());
        for (const auto& v : kVitals) {
            double x = v.mean[diag] + v.severity_loading * severity +
                       (older ? v.cohort_shift : 0.0) + v.sd * rng.normal();
            row.emplace_back(round_to(clamp(x, v.lo, v.hi), v.decimals));
        }

        const double sev = static_cast<double>(diag) + 0.5 * severity;
        row.emplace_back(std::string(kDiagnosisNames[diag]));
        row.emplace_back(std::string(rng.bernoulli(0.5) ? "F" : "M"));
        {
            const double p_current = 0.15 + 0.1 * static_cast<double>(diag);
            const std::size_t s = rng.categorical({0.55, 0.3, p_current});
            row.emplace_back(std::string(std::array{"never", "former", "current"}[s]));
        }
        {
            const double p_emerg = sigmoid(2.0 * (sev - 1.0));
            const std::size_t a = rng.categorical(
                {(1.0 - p_emerg) * 0.6, (1.0 - p_emerg) * 0.4 + 0.1, p_emerg});
            row.emplace_back(std::string(std::array{"elective", "urgent", "emergency"}[a]));
        }
        {
            std::vector<double> w{0.1, 0.1, 0.1};
            w[diag] += 0.8;
            row.emplace_back(std::string(
                std::array{"general", "stepdown", "icu"}[rng.categorical(w)]));
        }
        {
            std::vector<double> w{0.08, 0.08, 0.08};
            const std::size_t level = sev < 0.6 ? 0 : (sev < 1.6 ? 1 : 2);
            w[level] += 0.84;
            row.emplace_back(std::string(
                std::array{"none", "nasal_cannula", "ventilator"}[rng.categorical(w)]));
        }

        // Mostly diagnosis-consistent notes, with some crossover noise.
        const std::size_t triage_src = rng.bernoulli(0.85) ? diag : rng.index(3);
        std::string triage = kTriagePhrases[triage_src][rng.index(4)];
        if (rng.bernoulli(0.5))
            triage += std::string("; ") + kTriagePhrases[triage_src][rng.index(4)];
        row.emplace_back(std::move(triage));
        const std::size_t nurse_src = rng.bernoulli(0.85) ? diag : rng.index(3);
        row.emplace_back(std::string(kNursePhrases[nurse_src][rng.index(3)]));

        truth.add_row(std::move(row));
    }

    Table working = truth;
    for (std::size_t r = 0; r < n_rows; ++r)
        if (working.text(r, diag_col) == kDiagnosisNames[kStable])
            working.set(r, bp_col, Missing{});
    return {std::move(working), std::move(truth)};
}

} // namespace qimpute::data
