//! MPS writer for the deterministic equivalent.
//!
//! Column naming: `X1_i_j`, `X2_s_i_j`, `Y_s_i_jp_j` (all indices 0-based,
//! `jp` is the from-server). Rows are emitted in a fixed order and numbers use
//! the shortest round-trip decimal form, so output is byte-stable for a given
//! instance.

use std::fmt::Write as _;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::world::Instance;

const NAME_WIDTH: usize = 16;

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn push_entry(out: &mut String, column: &str, row: &str, value: f64) {
    let _ = writeln!(
        out,
        "    {:<w$}  {:<w$}  {}",
        column,
        row,
        fmt_num(value),
        w = NAME_WIDTH
    );
}

/// Render the instance as a single MPS document (maximization recorded via
/// `OBJSENSE`). Binary domains are declared with `BV` bounds.
pub fn export_mps<T: Scalar>(instance: &Instance<T>) -> Result<String> {
    instance.validate()?;
    let users = instance.num_users();
    let servers = instance.num_servers();
    let scenarios = instance.num_scenarios();

    let mut out = String::new();
    let _ = writeln!(out, "NAME            EDGE_PLACEMENT");
    let _ = writeln!(out, "OBJSENSE");
    let _ = writeln!(out, "    MAX");

    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  OBJ");
    for j in 0..servers {
        let _ = writeln!(out, " L  C4_{j}");
    }
    for s in 0..scenarios {
        for j in 0..servers {
            let _ = writeln!(out, " L  C5_{s}_{j}");
        }
    }
    for i in 0..users {
        let _ = writeln!(out, " L  C6_{i}");
    }
    for s in 0..scenarios {
        for i in 0..users {
            let _ = writeln!(out, " L  C7_{s}_{i}");
        }
    }
    for s in 0..scenarios {
        for i in 0..users {
            let _ = writeln!(out, " L  C8_{s}_{i}");
        }
    }
    for s in 0..scenarios {
        for i in 0..users {
            for jp in 0..servers {
                for j in 0..servers {
                    if j != jp {
                        let _ = writeln!(out, " L  C9_{s}_{i}_{jp}_{j}");
                    }
                }
            }
        }
    }

    let energy_coeff = |i: usize, j: usize| -> f64 {
        (instance.constants.sigma * T::from_count(instance.users[i].request)
            / instance.servers[j].capacity)
            .as_f64()
    };

    let _ = writeln!(out, "COLUMNS");
    // first-stage variables
    for i in 0..users {
        for j in 0..servers {
            let name = format!("X1_{i}_{j}");
            push_entry(&mut out, &name, "OBJ", instance.stage1_qos(i, j).as_f64());
            push_entry(&mut out, &name, &format!("C4_{j}"), energy_coeff(i, j));
            push_entry(&mut out, &name, &format!("C6_{i}"), 1.0);
            for s in 0..scenarios {
                push_entry(&mut out, &name, &format!("C8_{s}_{i}"), 1.0);
                for jj in 0..servers {
                    if jj != j {
                        push_entry(&mut out, &name, &format!("C9_{s}_{i}_{j}_{jj}"), 1.0);
                    }
                }
            }
        }
    }
    // second-stage variables
    for s in 0..scenarios {
        let p = instance.scenario_prob(s).as_f64();
        for i in 0..users {
            for j in 0..servers {
                let name = format!("X2_{s}_{i}_{j}");
                push_entry(
                    &mut out,
                    &name,
                    "OBJ",
                    p * instance.stage2_qos(i, j, s).as_f64(),
                );
                push_entry(&mut out, &name, &format!("C5_{s}_{j}"), energy_coeff(i, j));
                push_entry(&mut out, &name, &format!("C7_{s}_{i}"), 1.0);
                push_entry(&mut out, &name, &format!("C8_{s}_{i}"), -1.0);
                for jp in 0..servers {
                    if jp != j {
                        push_entry(&mut out, &name, &format!("C9_{s}_{i}_{jp}_{j}"), 1.0);
                    }
                }
            }
        }
    }
    // migration variables
    for s in 0..scenarios {
        let p = instance.scenario_prob(s).as_f64();
        for i in 0..users {
            for jp in 0..servers {
                for j in 0..servers {
                    if j != jp {
                        let name = format!("Y_{s}_{i}_{jp}_{j}");
                        let cost = p * instance.constants.rho.cost(jp, j).as_f64();
                        push_entry(&mut out, &name, "OBJ", if cost == 0.0 { 0.0 } else { -cost });
                        push_entry(&mut out, &name, &format!("C9_{s}_{i}_{jp}_{j}"), -1.0);
                    }
                }
            }
        }
    }

    let _ = writeln!(out, "RHS");
    for j in 0..servers {
        push_entry(
            &mut out,
            "RHS",
            &format!("C4_{j}"),
            instance.servers[j].energy_budget.as_f64(),
        );
    }
    for s in 0..scenarios {
        for j in 0..servers {
            push_entry(
                &mut out,
                "RHS",
                &format!("C5_{s}_{j}"),
                instance.servers[j].energy_budget.as_f64(),
            );
        }
    }
    for i in 0..users {
        push_entry(&mut out, "RHS", &format!("C6_{i}"), 1.0);
    }
    for s in 0..scenarios {
        for i in 0..users {
            push_entry(&mut out, "RHS", &format!("C7_{s}_{i}"), 1.0);
        }
    }
    for s in 0..scenarios {
        for i in 0..users {
            push_entry(&mut out, "RHS", &format!("C8_{s}_{i}"), 0.0);
        }
    }
    for s in 0..scenarios {
        for i in 0..users {
            for jp in 0..servers {
                for j in 0..servers {
                    if j != jp {
                        push_entry(&mut out, "RHS", &format!("C9_{s}_{i}_{jp}_{j}"), 1.0);
                    }
                }
            }
        }
    }

    let _ = writeln!(out, "BOUNDS");
    for i in 0..users {
        for j in 0..servers {
            let _ = writeln!(out, " BV BND           X1_{i}_{j}");
        }
    }
    for s in 0..scenarios {
        for i in 0..users {
            for j in 0..servers {
                let _ = writeln!(out, " BV BND           X2_{s}_{i}_{j}");
            }
        }
    }
    for s in 0..scenarios {
        for i in 0..users {
            for jp in 0..servers {
                for j in 0..servers {
                    if j != jp {
                        let _ = writeln!(out, " BV BND           Y_{s}_{i}_{jp}_{j}");
                    }
                }
            }
        }
    }

    let _ = writeln!(out, "ENDATA");
    Ok(out)
}
