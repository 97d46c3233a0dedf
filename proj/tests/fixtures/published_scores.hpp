#pragma once

// Published benchmark scores: three datasets x six models, as printed (four
// decimals). Fairness rows hold raw disparities; cost rows hold aligned values.

#include <array>
#include <string_view>

namespace fixtures {

struct Cell {
  std::string_view dataset;
  std::string_view model;
  double mirai;
  double accuracy;
  double f1;
  double explainability;
  double complexity;
  double faithfulness;
  double robustness_expl;
  double randomization;
  double fairness;
  double accuracy_diff;
  double precision_diff;
  double tpr_diff;
  double fpr_diff;
  double demographic_parity_diff;
  double equalized_odds_diff;
  double sustainability;
  double parameter_count;
  double flops_per_sample;
  double macs_per_sample;
  double normalized_kgco2e;
  double robustness;
  double hsja;
  double drift;
  double privacy;
  double mi_privacy;
  double shapr_privacy;
};

inline constexpr std::array<Cell, 18> kCells{{
    {"diabetes", "DT", 0.7635, 0.7870, 0.7960, 0.4456, 0.5619, 0.6105, 0.1101, 0.5000, 0.9980, 0.0020, 0.0040, 0.0020, 0.0010, 0.0010, 0.0020, 0.9899, 0.9698, 1.0000, 1.0000, 0.9925, 0.8676, 0.9558, 0.7794, 0.5164, 0.4762, 0.5566},
    {"diabetes", "XGB", 0.7763, 0.8880, 0.8360, 0.5126, 0.6363, 0.7211, 0.1931, 0.5000, 0.9993, 0.0040, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.9992, 0.9976, 1.0000, 1.0000, 0.9989, 0.8619, 0.9257, 0.7980, 0.5144, 0.4813, 0.5475},
    {"diabetes", "SVM", 0.7724, 0.8880, 0.8360, 0.4312, 0.6237, 0.5285, 0.0725, 0.5000, 0.9645, 0.0050, 0.2000, 0.0030, 0.0010, 0.0010, 0.0030, 0.9639, 0.8988, 0.9976, 0.9952, 0.9720, 0.8665, 0.9304, 0.8027, 0.6361, 0.7158, 0.5565},
    {"diabetes", "MLP", 0.7776, 0.8840, 0.8380, 0.4850, 0.6454, 0.5318, 0.2016, 0.5611, 0.9947, 0.0040, 0.0240, 0.0020, 0.0000, 0.0000, 0.0020, 0.9987, 0.9964, 0.9998, 0.9998, 0.9987, 0.8506, 0.8889, 0.8123, 0.5590, 0.5666, 0.5514},
    {"diabetes", "TRN", 0.7607, 0.8850, 0.8370, 0.5101, 0.6988, 0.5571, 0.1730, 0.6117, 0.9887, 0.0030, 0.0410, 0.0110, 0.0000, 0.0020, 0.0110, 0.8913, 0.7022, 0.9861, 0.9857, 0.8850, 0.8553, 0.9058, 0.8048, 0.5582, 0.5639, 0.5526},
    {"diabetes", "FTT", 0.5636, 0.8880, 0.8360, 0.4635, 0.6639, 0.6910, 0.1260, 0.3732, 0.9155, 0.0040, 0.5000, 0.0010, 0.0010, 0.0000, 0.0010, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.8730, 0.9237, 0.8224, 0.5635, 0.5724, 0.5545},
    {"german_credit", "DT", 0.7282, 0.7000, 0.7070, 0.4601, 0.6065, 0.5265, 0.2074, 0.5000, 0.8907, 0.1210, 0.0790, 0.1650, 0.0000, 0.1260, 0.1650, 0.9999, 0.9996, 1.0000, 1.0000, 0.9992, 0.6715, 0.5900, 0.7530, 0.6188, 0.5333, 0.7042},
    {"german_credit", "XGB", 0.7086, 0.7550, 0.7460, 0.4371, 0.5606, 0.4981, 0.1898, 0.5000, 0.9465, 0.0550, 0.0420, 0.0650, 0.0250, 0.0690, 0.0650, 0.9993, 0.9978, 1.0000, 1.0000, 0.9985, 0.5308, 0.2700, 0.7916, 0.6295, 0.7095, 0.5495},
    {"german_credit", "SVM", 0.7377, 0.7100, 0.6910, 0.4451, 0.6072, 0.5395, 0.1339, 0.5000, 0.9017, 0.0450, 0.0190, 0.1000, 0.1500, 0.1260, 0.1500, 0.9951, 0.9863, 0.9997, 0.9993, 0.9920, 0.6830, 0.5750, 0.7911, 0.6635, 0.7000, 0.6270},
    {"german_credit", "MLP", 0.7422, 0.7350, 0.7330, 0.4951, 0.6154, 0.5585, 0.1797, 0.6270, 0.8862, 0.0190, 0.0160, 0.1000, 0.2000, 0.1480, 0.2000, 0.9987, 0.9964, 0.9998, 0.9998, 0.9978, 0.6930, 0.5650, 0.8210, 0.6382, 0.6476, 0.6289},
    {"german_credit", "TRN", 0.6540, 0.7500, 0.7520, 0.4982, 0.6104, 0.4722, 0.1651, 0.7451, 0.8170, 0.1520, 0.0580, 0.2650, 0.1250, 0.2330, 0.2650, 0.8913, 0.7022, 0.9861, 0.9857, 0.8900, 0.4927, 0.2300, 0.7555, 0.5706, 0.5809, 0.5602},
    {"german_credit", "FTT", 0.4815, 0.7350, 0.7340, 0.4690, 0.6343, 0.5045, 0.1656, 0.5716, 0.9202, 0.0620, 0.0370, 0.1000, 0.0750, 0.1050, 0.1000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.4853, 0.2000, 0.7706, 0.5329, 0.5476, 0.5181},
    {"census_income", "DT", 0.6925, 0.8130, 0.8140, 0.4491, 0.6287, 0.5339, 0.1339, 0.5000, 0.9035, 0.1210, 0.0860, 0.0000, 0.0970, 0.1780, 0.0970, 0.9971, 0.9914, 1.0000, 1.0000, 0.9968, 0.5948, 0.3740, 0.8156, 0.5171, 0.4767, 0.5574},
    {"census_income", "XGB", 0.6890, 0.8690, 0.8630, 0.4271, 0.6259, 0.4810, 0.1016, 0.5000, 0.9012, 0.1010, 0.0590, 0.0990, 0.0630, 0.1720, 0.0990, 0.9992, 0.9976, 1.0000, 1.0000, 0.9990, 0.5092, 0.3840, 0.6345, 0.6098, 0.6541, 0.5654},
    {"census_income", "SVM", 0.7209, 0.8530, 0.8440, 0.4547, 0.6334, 0.5856, 0.0999, 0.5000, 0.9117, 0.1130, 0.0520, 0.0730, 0.0620, 0.1570, 0.0730, 0.9779, 0.9403, 0.9978, 0.9957, 0.9735, 0.6406, 0.4100, 0.8712, 0.6166, 0.6729, 0.5602},
    {"census_income", "MLP", 0.7189, 0.8520, 0.8500, 0.5078, 0.6014, 0.5864, 0.1171, 0.7262, 0.9168, 0.1150, 0.0090, 0.0490, 0.0770, 0.1720, 0.0770, 0.9991, 0.9976, 0.9998, 0.9998, 0.9988, 0.5967, 0.3560, 0.8373, 0.5710, 0.5813, 0.5607},
    {"census_income", "TRN", 0.6881, 0.8500, 0.8460, 0.5250, 0.6704, 0.5963, 0.0975, 0.7358, 0.9210, 0.1060, 0.0640, 0.0120, 0.0660, 0.1600, 0.0660, 0.8864, 0.7023, 0.9787, 0.9781, 0.8840, 0.5160, 0.4300, 0.6020, 0.5922, 0.6037, 0.5807},
    {"census_income", "FTT", 0.5698, 0.8490, 0.8480, 0.4809, 0.7005, 0.6026, 0.1003, 0.5200, 0.9387, 0.1100, 0.0050, 0.0170, 0.0480, 0.1400, 0.0480, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.8607, 0.9280, 0.7934, 0.5700, 0.5841, 0.5559},
}};

}  // namespace fixtures
