use jtrates_cli::config::RunConfig;
use proptest::prelude::*;

fn kind_block() -> impl Strategy<Value = String> {
    (0usize..4, 0.01f64..1.0, 0.01f64..1.0).prop_map(|(k, s0, s1)| match k {
        0 => "model = jt_merton\n".to_string(),
        1 => "model = jt_dothan\n".to_string(),
        2 => format!("model = jtd_merton\nsigma0 = {s0}\nsigma1 = {s1}\n"),
        _ => format!("model = jtd_dothan\nsigma0 = {s0}\nsigma1 = {s0}\n"),
    })
}

fn config_text() -> impl Strategy<Value = String> {
    (
        kind_block(),
        prop::array::uniform2(-1.0f64..1.0),
        prop::array::uniform2(-0.9f64..2.0),
        prop::array::uniform2(0.01f64..10.0),
        prop::array::uniform2(-2.0f64..2.0),
        prop::array::uniform2(0.1f64..3.0),
        0.0f64..0.2,
        prop::collection::vec(0.0f64..10.0, 1..6),
        (
            0usize..3,
            0usize..4,
            prop::option::of(any::<u64>()),
            2u64..1_000_000,
        ),
        (
            1e-4f64..0.1,
            1e-5f64..0.01,
            4usize..5000,
            4usize..5000,
            prop::option::of(0.5f64..10.0),
        ),
        (any::<bool>(), any::<bool>(), prop::option::of(0.0f64..5.0)),
    )
        .prop_map(
            |(
                kind,
                mu,
                eta,
                lam,
                psi,
                theta,
                r0,
                mut mats,
                (reg, meth, seed, paths),
                solver,
                (anti, md, horizon),
            )| {
                mats.sort_by(f64::total_cmp);
                let mats: Vec<String> = mats.iter().map(|m| m.to_string()).collect();
                let mut s = kind;
                s += &format!(
                    "mu0 = {}\nmu1 = {}\neta0 = {}\neta1 = {}\n",
                    mu[0], mu[1], eta[0], eta[1]
                );
                s += &format!(
                    "lambda0_q = {}\nlambda1_q = {}\npsi0 = {}\npsi1 = {}\n",
                    lam[0], lam[1], psi[0], psi[1]
                );
                s += &format!("theta0 = {}\ntheta1 = {}\nr0 = {r0}\n", theta[0], theta[1]);
                s += &format!("regime0 = {}\n", ["0", "1", "both"][reg]);
                s += &format!("maturities = {}\n", mats.join(","));
                s += &format!("method = {}\n", ["expectation", "pde", "mc", "all"][meth]);
                if let Some(seed) = seed {
                    s += &format!("seed = {seed}\n");
                }
                s += &format!(
                    "paths = {paths}\nmc_step = {}\node_step = {}\n",
                    solver.0, solver.1
                );
                s += &format!("fd_nx = {}\nfd_nt = {}\n", solver.2, solver.3);
                if let Some(x) = solver.4 {
                    s += &format!("fd_x_max = {x}\n");
                }
                if let Some(h) = horizon {
                    s += &format!("horizon = {h}\n");
                }
                s += &format!(
                    "antithetic = {anti}\nformat = {}\n",
                    if md { "markdown" } else { "csv" }
                );
                s
            },
        )
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(text in config_text()) {
        let first = RunConfig::parse(&text).unwrap();
        let serialized = first.to_config_string();
        let second = RunConfig::parse(&serialized).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(serialized, second.to_config_string());
    }

    #[test]
    fn physical_intensities_serialize_as_risk_neutral(l in 0.01f64..5.0, th in 0.1f64..3.0) {
        let text = format!(
            "model = jt_merton\nmu0 = 0\nmu1 = 0\nlambda0 = {l}\ntheta0 = {th}\nlambda1_q = 1\n"
        );
        let c = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(c.model.lambda[0], th * l);
        prop_assert_eq!(RunConfig::parse(&c.to_config_string()).unwrap(), c);
    }
}
