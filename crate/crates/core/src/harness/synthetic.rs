//! Seeded generators for CSV files laid out like two public benchmarks, for
//! runs where the originals are not at hand.
//!
//! `titanic_csv` writes eight numeric passenger features and a 0/1 `Survived`
//! label; `adult_csv` writes census-style rows whose columns are mostly
//! categorical (so one-hot encoding produces mostly binary features) and a
//! 0/1 `income` label. Labels are Bernoulli draws from a fixed logistic model
//! with interactions, so neither dataset is separable.

use std::fmt::Write;

use crate::objective::sigmoid;
use crate::rng::{self, WideRng};

fn pick<'a>(gen: &mut WideRng, options: &[(&'a str, f64)]) -> (usize, &'a str) {
    let total: f64 = options.iter().map(|o| o.1).sum();
    let mut u = rng::unit_uniform(gen) * total;
    for (i, (name, w)) in options.iter().enumerate() {
        if u < *w {
            return (i, name);
        }
        u -= w;
    }
    let last = options.len() - 1;
    (last, options[last].0)
}

fn bernoulli(gen: &mut WideRng, p: f64) -> bool {
    rng::unit_uniform(gen) < p
}

fn geometric(gen: &mut WideRng, p: f64, max: u32) -> u32 {
    let mut k = 0;
    while k < max && bernoulli(gen, p) {
        k += 1;
    }
    k
}

pub const TITANIC_HEADER: &str = "Pclass,Sex,Age,SibSp,Parch,Fare,Embarked,CabinKnown,Survived";

pub fn titanic_csv(n: usize, seed: u64) -> String {
    let mut gen = rng::seeded(seed);
    let mut out = String::with_capacity(n * 40);
    out.push_str(TITANIC_HEADER);
    out.push('\n');
    for _ in 0..n {
        let (class_idx, _) = pick(&mut gen, &[("1", 0.24), ("2", 0.21), ("3", 0.55)]);
        let pclass = class_idx + 1;
        let female = bernoulli(&mut gen, 0.35);
        let age = if bernoulli(&mut gen, 0.08) {
            rng::uniform_range(&mut gen, 0.5, 12.0)
        } else {
            14.0 + 58.0 * rng::unit_uniform(&mut gen).powf(1.4)
        }
        .round();
        let sibsp = geometric(&mut gen, 0.32, 8);
        let parch = geometric(&mut gen, 0.24, 6);
        let (lo, hi) = match pclass {
            1 => (30.0, 250.0),
            2 => (10.0, 40.0),
            _ => (5.0, 25.0),
        };
        let fare = (rng::uniform_range(&mut gen, lo, hi) * (1.0 + 0.3 * (sibsp + parch) as f64) * 100.0)
            .round()
            / 100.0;
        let (embarked, _) = pick(&mut gen, &[("S", 0.72), ("C", 0.19), ("Q", 0.09)]);
        let cabin_p = [0.8, 0.2, 0.05][class_idx];
        let cabin = bernoulli(&mut gen, cabin_p);

        let f = f64::from(u8::from(female));
        let logit = -1.1 + 2.6 * f - 0.95 * (pclass as f64 - 1.0)
            - 1.6 * f * f64::from(u8::from(pclass == 3))
            + 1.4 * f64::from(u8::from(age < 12.0))
            - 0.025 * (age - 30.0).max(0.0)
            - 0.7 * f64::from(u8::from(sibsp >= 3))
            + 0.35 * f64::from(u8::from(embarked == 1))
            + 0.5 * f64::from(u8::from(cabin))
            + 0.12 * (1.0 + fare).ln();
        let survived = bernoulli(&mut gen, sigmoid(logit));
        writeln!(
            out,
            "{pclass},{},{age},{sibsp},{parch},{fare},{embarked},{},{}",
            u8::from(female),
            u8::from(cabin),
            u8::from(survived)
        )
        .expect("write to string");
    }
    out
}

pub const ADULT_HEADER: &str = "age,workclass,fnlwgt,education,education-num,marital-status,occupation,relationship,race,sex,capital-gain,capital-loss,hours-per-week,native-country,income";

const WORKCLASS: &[(&str, f64)] = &[
    ("Private", 0.70),
    ("Self-emp-not-inc", 0.08),
    ("Local-gov", 0.065),
    ("State-gov", 0.04),
    ("Self-emp-inc", 0.035),
    ("Federal-gov", 0.03),
    ("Without-pay", 0.005),
];

// (name, weight, years of education)
const EDUCATION: &[(&str, f64, f64)] = &[
    ("Preschool", 0.002, 1.0),
    ("1st-4th", 0.005, 2.0),
    ("5th-6th", 0.01, 3.0),
    ("7th-8th", 0.02, 4.0),
    ("9th", 0.016, 5.0),
    ("10th", 0.028, 6.0),
    ("11th", 0.036, 7.0),
    ("12th", 0.013, 8.0),
    ("HS-grad", 0.32, 9.0),
    ("Some-college", 0.22, 10.0),
    ("Assoc-voc", 0.042, 11.0),
    ("Assoc-acdm", 0.033, 12.0),
    ("Bachelors", 0.165, 13.0),
    ("Masters", 0.054, 14.0),
    ("Prof-school", 0.018, 15.0),
    ("Doctorate", 0.013, 16.0),
];

const MARITAL: &[(&str, f64)] = &[
    ("Married-civ-spouse", 0.46),
    ("Never-married", 0.33),
    ("Divorced", 0.136),
    ("Separated", 0.031),
    ("Widowed", 0.03),
    ("Married-spouse-absent", 0.012),
    ("Married-AF-spouse", 0.001),
];

// (name, weight, log-odds shift)
const OCCUPATION: &[(&str, f64, f64)] = &[
    ("Prof-specialty", 0.13, 0.8),
    ("Craft-repair", 0.13, 0.0),
    ("Exec-managerial", 0.13, 0.95),
    ("Adm-clerical", 0.12, -0.1),
    ("Sales", 0.115, 0.3),
    ("Other-service", 0.10, -0.9),
    ("Machine-op-inspct", 0.065, -0.3),
    ("Transport-moving", 0.05, -0.1),
    ("Handlers-cleaners", 0.045, -0.8),
    ("Farming-fishing", 0.032, -0.7),
    ("Tech-support", 0.03, 0.45),
    ("Protective-serv", 0.021, 0.35),
    ("Priv-house-serv", 0.005, -1.5),
    ("Armed-Forces", 0.002, 0.0),
];

const RACE: &[(&str, f64)] = &[
    ("White", 0.855),
    ("Black", 0.096),
    ("Asian-Pac-Islander", 0.031),
    ("Amer-Indian-Eskimo", 0.01),
    ("Other", 0.008),
];

const COUNTRY: &[(&str, f64)] = &[
    ("United-States", 0.9),
    ("Mexico", 0.02),
    ("Philippines", 0.01),
    ("Germany", 0.008),
    ("Canada", 0.007),
    ("India", 0.006),
    ("England", 0.006),
    ("China", 0.005),
    ("Cuba", 0.005),
    ("Jamaica", 0.004),
    ("South", 0.004),
    ("Italy", 0.004),
];

pub fn adult_csv(n: usize, seed: u64) -> String {
    let mut gen = rng::seeded(seed);
    let mut out = String::with_capacity(n * 120);
    out.push_str(ADULT_HEADER);
    out.push('\n');
    let edu_weights: Vec<(&str, f64)> = EDUCATION.iter().map(|e| (e.0, e.1)).collect();
    let occ_weights: Vec<(&str, f64)> = OCCUPATION.iter().map(|o| (o.0, o.1)).collect();
    for _ in 0..n {
        let age = (17.0 + 60.0 * rng::unit_uniform(&mut gen).powf(1.3)).round();
        let (_, workclass) = pick(&mut gen, WORKCLASS);
        let fnlwgt = rng::uniform_int(&mut gen, 20_000, 600_000);
        let (edu_idx, education) = pick(&mut gen, &edu_weights);
        let edu_num = EDUCATION[edu_idx].2;
        let (marital_idx, marital) = pick(&mut gen, MARITAL);
        let (occ_idx, occupation) = pick(&mut gen, &occ_weights);
        let male = bernoulli(&mut gen, 0.67);
        let married = marital_idx == 0 || marital_idx == 6;
        let relationship = if married {
            if male {
                "Husband"
            } else {
                "Wife"
            }
        } else {
            pick(
                &mut gen,
                &[
                    ("Not-in-family", 0.5),
                    ("Own-child", 0.3),
                    ("Unmarried", 0.15),
                    ("Other-relative", 0.05),
                ],
            )
            .1
        };
        let (_, race) = pick(&mut gen, RACE);
        let capital_gain = if bernoulli(&mut gen, 0.08) {
            rng::uniform_range(&mut gen, 6.0, 10.5).exp().round()
        } else {
            0.0
        };
        let capital_loss = if bernoulli(&mut gen, 0.047) {
            rng::uniform_range(&mut gen, 1000.0, 2500.0).round()
        } else {
            0.0
        };
        let hours = if bernoulli(&mut gen, 0.45) {
            40.0
        } else {
            rng::uniform_range(&mut gen, 10.0, 80.0).round()
        };
        let (_, country) = pick(&mut gen, COUNTRY);

        let logit = -9.4
            + 0.33 * edu_num
            + 0.075 * age.min(60.0)
            - 0.0012 * (age - 45.0).max(0.0).powi(2)
            + 2.0 * f64::from(u8::from(married))
            + OCCUPATION[occ_idx].2
            + 0.03 * (hours - 40.0)
            + 0.3 * f64::from(u8::from(male))
            + if capital_gain > 5000.0 { 3.0 } else { 0.0 }
            + if capital_loss > 1500.0 { 1.0 } else { 0.0 }
            + if workclass == "Self-emp-inc" { 0.6 } else { 0.0 };
        let income = bernoulli(&mut gen, sigmoid(logit));
        writeln!(
            out,
            "{age},{workclass},{fnlwgt},{education},{edu_num},{marital},{occupation},{relationship},{race},{},{capital_gain},{capital_loss},{hours},{country},{}",
            if male { "Male" } else { "Female" },
            u8::from(income)
        )
        .expect("write to string");
    }
    out
}
