use super::{Facility, FlpmClient, FlpmInstance, InstanceError};

/// Result of reading an ORLIB uncapacitated facility location file.
#[derive(Clone, Debug, PartialEq)]
pub struct OrlibInstance {
    pub instance: FlpmInstance,
    /// Whether the service costs satisfy the bipartite triangle inequality
    /// `c(j,i) <= c(j,i') + c(j',i') + c(j',i)`. `None` when the instance is too
    /// large for the quartic check.
    pub metric: Option<bool>,
}

const METRIC_CHECK_LIMIT: usize = 2_000;

/// Reads the ORLIB `cap*`/`uncap*` layout: a header `n m`, then `n` lines of
/// `capacity opening_cost`, then per customer its demand followed by `n`
/// allocation costs. Tokens may wrap across lines. The capacity column is a
/// placeholder and may be non-numeric.
pub fn read_orlib(text: &[u8]) -> Result<OrlibInstance, InstanceError> {
    let text = String::from_utf8_lossy(text);
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let num = |index: usize| -> Result<f64, InstanceError> {
        let token = tokens.get(index).ok_or(InstanceError::Truncated {
            expected: index + 1,
            found: tokens.len(),
        })?;
        token.parse::<f64>().map_err(|_| InstanceError::BadToken {
            index,
            token: token.to_string(),
        })
    };
    let count = |index: usize| -> Result<usize, InstanceError> {
        let x = num(index)?;
        if x < 0.0 || x.fract() != 0.0 {
            return Err(InstanceError::BadToken {
                index,
                token: tokens[index].to_string(),
            });
        }
        Ok(x as usize)
    };
    let n_fac = count(0)?;
    let n_cli = count(1)?;
    let expected = 2 + 2 * n_fac + n_cli * (1 + n_fac);
    if tokens.len() < expected {
        return Err(InstanceError::Truncated {
            expected,
            found: tokens.len(),
        });
    }
    if tokens.len() > expected {
        return Err(InstanceError::TrailingTokens {
            extra: tokens.len() - expected,
        });
    }
    let mut pos = 2;
    let mut facilities = Vec::with_capacity(n_fac);
    for i in 0..n_fac {
        // capacity placeholder
        pos += 1;
        facilities.push(Facility {
            id: i as u32 + 1,
            opening_cost: num(pos)?,
        });
        pos += 1;
    }
    let mut clients = Vec::with_capacity(n_cli);
    let mut dist = Vec::with_capacity(n_cli);
    for j in 0..n_cli {
        let _demand = num(pos)?;
        pos += 1;
        let row = (0..n_fac)
            .map(|i| num(pos + i))
            .collect::<Result<Vec<_>, _>>()?;
        pos += n_fac;
        clients.push(FlpmClient {
            id: j as u32 + 1,
            penalty: f64::INFINITY,
            multiplicity: 1.0,
        });
        dist.push(row);
    }
    let instance = FlpmInstance {
        facilities,
        clients,
        dist,
    };
    instance.validate()?;
    let metric = (n_fac * n_cli <= METRIC_CHECK_LIMIT).then(|| bipartite_metric(&instance.dist));
    Ok(OrlibInstance { instance, metric })
}

fn bipartite_metric(dist: &[Vec<f64>]) -> bool {
    let tol = super::DEFAULT_TOL;
    for (j, row) in dist.iter().enumerate() {
        for (jj, other) in dist.iter().enumerate() {
            if j == jj {
                continue;
            }
            for (i, &direct) in row.iter().enumerate() {
                for (ii, &via) in row.iter().enumerate() {
                    if ii != i && direct > via + other[ii] + other[i] + tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_hand_written_file() {
        let text = "2 2\n0 3.5\n0 4\n1 1 2\n1 2 1\n";
        let out = read_orlib(text.as_bytes()).unwrap();
        let inst = &out.instance;
        assert_eq!(inst.facilities[0].opening_cost, 3.5);
        assert_eq!(inst.facilities[1].opening_cost, 4.0);
        assert_eq!(inst.dist, vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(inst.clients.iter().all(|c| c.penalty.is_infinite() && c.multiplicity == 1.0));
        assert_eq!(out.metric, Some(true));
    }

    #[test]
    fn capacity_placeholder_may_be_a_word() {
        let text = "1 1\ncapacity 7\n5 2\n";
        assert_eq!(read_orlib(text.as_bytes()).unwrap().instance.dist, vec![vec![2.0]]);
    }

    #[test]
    fn header_claiming_more_clients_is_truncated() {
        let text = "2 3\n0 3.5\n0 4\n1 1 2\n1 2 1\n";
        assert!(matches!(
            read_orlib(text.as_bytes()),
            Err(InstanceError::Truncated { expected: 15, found: 12 })
        ));
    }

    #[test]
    fn extra_tokens_are_rejected() {
        let text = "1 1\n0 1\n1 1\n9\n";
        assert!(matches!(
            read_orlib(text.as_bytes()),
            Err(InstanceError::TrailingTokens { extra: 1 })
        ));
    }

    #[test]
    fn flags_non_metric_costs() {
        let text = "2 2\n0 1\n0 1\n1 1 100\n1 1 1\n";
        assert_eq!(read_orlib(text.as_bytes()).unwrap().metric, Some(false));
    }
}
