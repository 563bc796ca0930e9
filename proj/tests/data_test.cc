// Copyright 2026 The mismm Authors. All Rights Reserved.
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

#include <sstream>

#include <gtest/gtest.h>

#include "mismm/data.h"
#include "mismm/errors.h"

namespace mismm {
namespace {

constexpr char kFourRows[] =
    "bag_id,bag_label,instance_id,f1,f2\n"
    "A,1,A.1,0.5,1\n"
    "A,1,A.1,1.5,2\n"
    "B,-1,B.1,3,4\n"
    "B,-1,B.2,5,6\n";

Dataset Parse(const std::string& text) {
  std::istringstream in(text);
  return ReadDatasetCsv(in);
}

std::string ErrorOf(const std::string& text) {
  try {
    Parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(LoadDataset, GroupsRowsIntoInstances) {
  const Dataset ds = Parse(kFourRows);
  ASSERT_EQ(ds.num_bags(), 2);
  ASSERT_EQ(ds.num_instances(), 3);
  EXPECT_EQ(ds.instance(0).num_samples(), 2);
  EXPECT_EQ(ds.instance(1).num_samples(), 1);
  EXPECT_EQ(ds.instance(2).num_samples(), 1);
  EXPECT_EQ(ds.bag(0).label, 1);
  EXPECT_EQ(ds.bag(1).label, -1);
  EXPECT_EQ(ds.bag_of(2), 1);
  EXPECT_EQ(ds.instance(2).id(), "B.2");
  EXPECT_EQ(ds.feature_names(), (std::vector<std::string>{"f1", "f2"}));
  EXPECT_EQ(ds.num_negative_instances(), 2);
}

TEST(LoadDataset, ColumnsMayAppearInAnyOrder) {
  const Dataset ds = Parse(
      "f1,instance_id,bag_label,bag_id\n"
      "1,i,+1,A\n2,j,-1,B\n");
  EXPECT_EQ(ds.num_bags(), 2);
  EXPECT_EQ(ds.bag(0).label, 1);
  EXPECT_EQ(ds.dim(), 1);
}

TEST(LoadDataset, FirstAppearanceOrderAcrossInterleavedRows) {
  const Dataset ds = Parse(
      "bag_id,bag_label,instance_id,f1\n"
      "A,1,a2,1\nB,-1,b1,2\nA,1,a1,3\nA,1,a2,4\n");
  ASSERT_EQ(ds.num_instances(), 3);
  EXPECT_EQ(ds.instance(0).id(), "a2");
  EXPECT_EQ(ds.instance(0).num_samples(), 2);
  EXPECT_EQ(ds.instance(1).id(), "b1");
  EXPECT_EQ(ds.instance(2).id(), "a1");
  EXPECT_EQ(ds.bag(0).instances, (std::vector<int>{0, 2}));
}

TEST(LoadDataset, Errors) {
  EXPECT_NE(ErrorOf("bag_id,bag_label,instance_id,f1\nA,1,a,1\nA,-1,b,2\n")
                .find("inconsistent bag label"),
            std::string::npos);
  EXPECT_NE(ErrorOf("bag_id,bag_label,instance_id,f1\n").find("no samples"),
            std::string::npos);
  EXPECT_NE(ErrorOf("bag_id,instance_id,f1\nA,a,1\n").find("missing column"),
            std::string::npos);
  EXPECT_NE(ErrorOf("bag_id,bag_label,instance_id,f1\nA,1,a,nan\n")
                .find("non-finite"),
            std::string::npos);
  EXPECT_NE(ErrorOf("bag_id,bag_label,instance_id,f1\nA,2,a,1\n"), "");
  EXPECT_THROW(LoadDataset("/nonexistent/file.csv"), DataError);
}

TEST(SaveDataset, RoundTrip) {
  const Dataset ds = Parse(kFourRows);
  std::ostringstream out;
  WriteDatasetCsv(ds, out);
  const Dataset again = Parse(out.str());
  ASSERT_EQ(again.num_instances(), ds.num_instances());
  for (int i = 0; i < ds.num_instances(); ++i) {
    EXPECT_EQ(again.instance(i).id(), ds.instance(i).id());
    EXPECT_EQ(again.instance(i).samples(), ds.instance(i).samples());
    EXPECT_EQ(again.instance_label(i), ds.instance_label(i));
  }
  std::ostringstream out2;
  WriteDatasetCsv(again, out2);
  EXPECT_EQ(out.str(), out2.str());
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(std::stod(FormatDouble(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Dataset, RejectsBrokenPartitions) {
  std::vector<DistInstance> inst{DistInstance("a", Eigen::MatrixXd::Ones(1, 1)),
                                 DistInstance("b", Eigen::MatrixXd::Ones(1, 1))};
  EXPECT_THROW(Dataset(inst, {Bag{"A", {0}, 1}}, {"x"}), DataError);
  EXPECT_THROW(Dataset(inst, {Bag{"A", {0, 1}, 1}, Bag{"B", {1}, -1}}, {"x"}),
               DataError);
  EXPECT_THROW(DistInstance("e", Eigen::MatrixXd(0, 2)), DataError);
}

TEST(Dataset, SubsetBagsRenumbers) {
  const Dataset ds = Parse(kFourRows);
  const std::vector<int> keep{1};
  const Dataset sub = ds.SubsetBags(keep);
  ASSERT_EQ(sub.num_instances(), 2);
  EXPECT_EQ(sub.bag(0).instances, (std::vector<int>{0, 1}));
  EXPECT_EQ(sub.instance(1).id(), "B.2");
}

TEST(Scaler, MeanAndSd) {
  const Dataset ds = Parse(
      "bag_id,bag_label,instance_id,f1\nA,1,a,1\nA,1,a,2\nB,-1,b,3\n");
  const ScaleParams p = FitScaler(ds);
  EXPECT_DOUBLE_EQ(p.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(p.sd(0), 1.0);
  const Dataset s = ApplyScaler(ds, p);
  EXPECT_DOUBLE_EQ(s.instance(0).samples()(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.instance(0).samples()(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(s.instance(1).samples()(0, 0), 1.0);
}

TEST(Scaler, RefitOnScaledDataIsIdentity) {
  const Dataset ds = Parse(kFourRows);
  const Dataset once = ApplyScaler(ds, FitScaler(ds));
  const Dataset twice = ApplyScaler(once, FitScaler(once));
  for (int i = 0; i < ds.num_instances(); ++i) {
    EXPECT_LE((once.instance(i).samples() - twice.instance(i).samples())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(Scaler, ConstantColumn) {
  const Dataset ds = Parse(
      "bag_id,bag_label,instance_id,f1,f2\nA,1,a,5,1\nA,1,a,5,2\nB,-1,b,5,3\n");
  EXPECT_THROW(FitScaler(ds), DataError);
  const ScaleParams p = FitScaler(ds, ConstantFeaturePolicy::kDrop);
  EXPECT_EQ(p.kept, (std::vector<int>{1}));
  EXPECT_EQ(p.dropped_names, (std::vector<std::string>{"f1"}));
  EXPECT_EQ(ApplyScaler(ds, p).dim(), 1);
}

TEST(Scaler, NeedsTwoSamples) {
  const Dataset ds = Parse("bag_id,bag_label,instance_id,f1\nA,1,a,5\n");
  EXPECT_THROW(FitScaler(ds), DataError);
}

TEST(LogTransform, ReplacesColumn) {
  const Dataset ds = Parse(kFourRows);
  const std::vector<std::string> cols{"f2"};
  const Dataset l = LogTransform(ds, cols);
  EXPECT_DOUBLE_EQ(l.instance(0).samples()(1, 1), std::log(2.0));
  EXPECT_DOUBLE_EQ(l.instance(0).samples()(1, 0), 1.5);
  const std::vector<std::string> bad{"nope"};
  EXPECT_THROW(LogTransform(ds, bad), DataError);
}

}  // namespace
}  // namespace mismm
