// Copyright 2026 The trajreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRAJREID_BUNDLED_HOLIDAYS_H_
#define TRAJREID_BUNDLED_HOLIDAYS_H_

#include <string_view>

namespace trajreid {

// Japanese national holidays 2015-2024, including substitute and bridge
// holidays and the one-off 2019 and 2020/2021 date moves. Same content as
// data/jp_holidays_2015_2024.csv.
inline constexpr std::string_view kBundledJapaneseHolidaysCsv =
    "2015-01-01,New Year's Day\n"
    "2015-01-12,Coming of Age Day\n"
    "2015-02-11,Foundation Day\n"
    "2015-03-21,Vernal Equinox Day\n"
    "2015-04-29,Showa Day\n"
    "2015-05-03,Constitution Day\n"
    "2015-05-04,Greenery Day\n"
    "2015-05-05,Children's Day\n"
    "2015-05-06,Constitution Day (observed)\n"
    "2015-07-20,Marine Day\n"
    "2015-09-21,Respect for the Aged Day\n"
    "2015-09-22,National Holiday\n"
    "2015-09-23,Autumnal Equinox Day\n"
    "2015-10-12,Health and Sports Day\n"
    "2015-11-03,Culture Day\n"
    "2015-11-23,Labor Thanksgiving Day\n"
    "2015-12-23,Emperor's Birthday\n"
    "2016-01-01,New Year's Day\n"
    "2016-01-11,Coming of Age Day\n"
    "2016-02-11,Foundation Day\n"
    "2016-03-20,Vernal Equinox Day\n"
    "2016-03-21,Vernal Equinox Day (observed)\n"
    "2016-04-29,Showa Day\n"
    "2016-05-03,Constitution Day\n"
    "2016-05-04,Greenery Day\n"
    "2016-05-05,Children's Day\n"
    "2016-07-18,Marine Day\n"
    "2016-08-11,Mountain Day\n"
    "2016-09-19,Respect for the Aged Day\n"
    "2016-09-22,Autumnal Equinox Day\n"
    "2016-10-10,Health and Sports Day\n"
    "2016-11-03,Culture Day\n"
    "2016-11-23,Labor Thanksgiving Day\n"
    "2016-12-23,Emperor's Birthday\n"
    "2017-01-01,New Year's Day\n"
    "2017-01-02,New Year's Day (observed)\n"
    "2017-01-09,Coming of Age Day\n"
    "2017-02-11,Foundation Day\n"
    "2017-03-20,Vernal Equinox Day\n"
    "2017-04-29,Showa Day\n"
    "2017-05-03,Constitution Day\n"
    "2017-05-04,Greenery Day\n"
    "2017-05-05,Children's Day\n"
    "2017-07-17,Marine Day\n"
    "2017-08-11,Mountain Day\n"
    "2017-09-18,Respect for the Aged Day\n"
    "2017-09-23,Autumnal Equinox Day\n"
    "2017-10-09,Health and Sports Day\n"
    "2017-11-03,Culture Day\n"
    "2017-11-23,Labor Thanksgiving Day\n"
    "2017-12-23,Emperor's Birthday\n"
    "2018-01-01,New Year's Day\n"
    "2018-01-08,Coming of Age Day\n"
    "2018-02-11,Foundation Day\n"
    "2018-02-12,Foundation Day (observed)\n"
    "2018-03-21,Vernal Equinox Day\n"
    "2018-04-29,Showa Day\n"
    "2018-04-30,Showa Day (observed)\n"
    "2018-05-03,Constitution Day\n"
    "2018-05-04,Greenery Day\n"
    "2018-05-05,Children's Day\n"
    "2018-07-16,Marine Day\n"
    "2018-08-11,Mountain Day\n"
    "2018-09-17,Respect for the Aged Day\n"
    "2018-09-23,Autumnal Equinox Day\n"
    "2018-09-24,Autumnal Equinox Day (observed)\n"
    "2018-10-08,Health and Sports Day\n"
    "2018-11-03,Culture Day\n"
    "2018-11-23,Labor Thanksgiving Day\n"
    "2018-12-23,Emperor's Birthday\n"
    "2018-12-24,Emperor's Birthday (observed)\n"
    "2019-01-01,New Year's Day\n"
    "2019-01-14,Coming of Age Day\n"
    "2019-02-11,Foundation Day\n"
    "2019-03-21,Vernal Equinox Day\n"
    "2019-04-29,Showa Day\n"
    "2019-04-30,National Holiday\n"
    "2019-05-01,Enthronement Day\n"
    "2019-05-02,National Holiday\n"
    "2019-05-03,Constitution Day\n"
    "2019-05-04,Greenery Day\n"
    "2019-05-05,Children's Day\n"
    "2019-05-06,Children's Day (observed)\n"
    "2019-07-15,Marine Day\n"
    "2019-08-11,Mountain Day\n"
    "2019-08-12,Mountain Day (observed)\n"
    "2019-09-16,Respect for the Aged Day\n"
    "2019-09-23,Autumnal Equinox Day\n"
    "2019-10-14,Health and Sports Day\n"
    "2019-10-22,Enthronement Ceremony Day\n"
    "2019-11-03,Culture Day\n"
    "2019-11-04,Culture Day (observed)\n"
    "2019-11-23,Labor Thanksgiving Day\n"
    "2020-01-01,New Year's Day\n"
    "2020-01-13,Coming of Age Day\n"
    "2020-02-11,Foundation Day\n"
    "2020-02-23,Emperor's Birthday\n"
    "2020-02-24,Emperor's Birthday (observed)\n"
    "2020-03-20,Vernal Equinox Day\n"
    "2020-04-29,Showa Day\n"
    "2020-05-03,Constitution Day\n"
    "2020-05-04,Greenery Day\n"
    "2020-05-05,Children's Day\n"
    "2020-05-06,Constitution Day (observed)\n"
    "2020-07-23,Marine Day\n"
    "2020-07-24,Sports Day\n"
    "2020-08-10,Mountain Day\n"
    "2020-09-21,Respect for the Aged Day\n"
    "2020-09-22,Autumnal Equinox Day\n"
    "2020-11-03,Culture Day\n"
    "2020-11-23,Labor Thanksgiving Day\n"
    "2021-01-01,New Year's Day\n"
    "2021-01-11,Coming of Age Day\n"
    "2021-02-11,Foundation Day\n"
    "2021-02-23,Emperor's Birthday\n"
    "2021-03-20,Vernal Equinox Day\n"
    "2021-04-29,Showa Day\n"
    "2021-05-03,Constitution Day\n"
    "2021-05-04,Greenery Day\n"
    "2021-05-05,Children's Day\n"
    "2021-07-22,Marine Day\n"
    "2021-07-23,Sports Day\n"
    "2021-08-08,Mountain Day\n"
    "2021-08-09,Mountain Day (observed)\n"
    "2021-09-20,Respect for the Aged Day\n"
    "2021-09-23,Autumnal Equinox Day\n"
    "2021-11-03,Culture Day\n"
    "2021-11-23,Labor Thanksgiving Day\n"
    "2022-01-01,New Year's Day\n"
    "2022-01-10,Coming of Age Day\n"
    "2022-02-11,Foundation Day\n"
    "2022-02-23,Emperor's Birthday\n"
    "2022-03-21,Vernal Equinox Day\n"
    "2022-04-29,Showa Day\n"
    "2022-05-03,Constitution Day\n"
    "2022-05-04,Greenery Day\n"
    "2022-05-05,Children's Day\n"
    "2022-07-18,Marine Day\n"
    "2022-08-11,Mountain Day\n"
    "2022-09-19,Respect for the Aged Day\n"
    "2022-09-23,Autumnal Equinox Day\n"
    "2022-10-10,Sports Day\n"
    "2022-11-03,Culture Day\n"
    "2022-11-23,Labor Thanksgiving Day\n"
    "2023-01-01,New Year's Day\n"
    "2023-01-02,New Year's Day (observed)\n"
    "2023-01-09,Coming of Age Day\n"
    "2023-02-11,Foundation Day\n"
    "2023-02-23,Emperor's Birthday\n"
    "2023-03-21,Vernal Equinox Day\n"
    "2023-04-29,Showa Day\n"
    "2023-05-03,Constitution Day\n"
    "2023-05-04,Greenery Day\n"
    "2023-05-05,Children's Day\n"
    "2023-07-17,Marine Day\n"
    "2023-08-11,Mountain Day\n"
    "2023-09-18,Respect for the Aged Day\n"
    "2023-09-23,Autumnal Equinox Day\n"
    "2023-10-09,Sports Day\n"
    "2023-11-03,Culture Day\n"
    "2023-11-23,Labor Thanksgiving Day\n"
    "2024-01-01,New Year's Day\n"
    "2024-01-08,Coming of Age Day\n"
    "2024-02-11,Foundation Day\n"
    "2024-02-12,Foundation Day (observed)\n"
    "2024-02-23,Emperor's Birthday\n"
    "2024-03-20,Vernal Equinox Day\n"
    "2024-04-29,Showa Day\n"
    "2024-05-03,Constitution Day\n"
    "2024-05-04,Greenery Day\n"
    "2024-05-05,Children's Day\n"
    "2024-05-06,Children's Day (observed)\n"
    "2024-07-15,Marine Day\n"
    "2024-08-11,Mountain Day\n"
    "2024-08-12,Mountain Day (observed)\n"
    "2024-09-16,Respect for the Aged Day\n"
    "2024-09-22,Autumnal Equinox Day\n"
    "2024-09-23,Autumnal Equinox Day (observed)\n"
    "2024-10-14,Sports Day\n"
    "2024-11-03,Culture Day\n"
    "2024-11-04,Culture Day (observed)\n"
    "2024-11-23,Labor Thanksgiving Day\n"
    ;

}  // namespace trajreid

#endif  // TRAJREID_BUNDLED_HOLIDAYS_H_
