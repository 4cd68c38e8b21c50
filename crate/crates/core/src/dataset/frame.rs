use chrono::{NaiveDateTime, TimeDelta};

use crate::error::{Error, Result};

/// Sampling step of every frame: one hour.
pub const STEP: TimeDelta = TimeDelta::hours(1);

/// A named channel; `None` marks a missing observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl Channel {
    pub fn new(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    /// Builds a channel with no missing values.
    pub fn dense(name: impl Into<String>, values: &[f64]) -> Self {
        Self::new(name, values.iter().copied().map(Some).collect())
    }
}

/// Regularly sampled hourly multivariate series with a designated target
/// channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    timestamps: Vec<NaiveDateTime>,
    channels: Vec<Channel>,
    target: usize,
}

impl TimeSeriesFrame {
    /// Validates the hourly grid, channel lengths and the target name.
    pub fn new(
        timestamps: Vec<NaiveDateTime>,
        channels: Vec<Channel>,
        target: &str,
    ) -> Result<Self> {
        for pair in timestamps.windows(2) {
            if pair[1] - pair[0] != STEP {
                return Err(Error::Ordering(format!(
                    "timestamps {} and {} are not one hour apart",
                    pair[0], pair[1]
                )));
            }
        }
        for channel in &channels {
            if channel.values.len() != timestamps.len() {
                return Err(Error::Schema(format!(
                    "channel '{}' has {} values for {} timestamps",
                    channel.name,
                    channel.values.len(),
                    timestamps.len()
                )));
            }
            if channel.values.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!(
                    "channel '{}' contains a non-finite value",
                    channel.name
                )));
            }
        }
        for (i, a) in channels.iter().enumerate() {
            if channels[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Schema(format!("duplicate channel '{}'", a.name)));
            }
        }
        let target = channels
            .iter()
            .position(|c| c.name == target)
            .ok_or_else(|| Error::Schema(format!("target channel '{target}' not found")))?;
        Ok(Self {
            timestamps,
            channels,
            target,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &Channel {
        &self.channels[self.target]
    }

    /// Number of masked cells across all channels.
    pub fn missing_count(&self) -> usize {
        self.channels
            .iter()
            .map(|c| c.values.iter().filter(|v| v.is_none()).count())
            .sum()
    }

    /// Non-missing target observations in chronological order.
    pub fn observed_target(&self) -> Vec<f64> {
        self.target().values.iter().flatten().copied().collect()
    }

    /// Same frame with channels reordered; `order` must be a permutation of
    /// the channel names.
    pub fn reorder_channels(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.channels.len() {
            return Err(Error::Schema("channel order must name every channel".into()));
        }
        let channels = order
            .iter()
            .map(|name| {
                self.channel(name)
                    .cloned()
                    .ok_or_else(|| Error::Schema(format!("unknown channel '{name}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.timestamps.clone(), channels, &self.target().name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn hours(n: usize) -> Vec<NaiveDateTime> {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        (0..n).map(|i| start + STEP * i as i32).collect()
    }

    #[test]
    fn rejects_irregular_step() {
        let mut ts = hours(3);
        ts[2] += TimeDelta::minutes(30);
        let err = TimeSeriesFrame::new(ts, vec![Channel::dense("swh", &[1.0, 2.0, 3.0])], "swh");
        assert!(matches!(err, Err(Error::Ordering(_))));
    }

    #[test]
    fn rejects_ragged_channels_and_missing_target() {
        let err = TimeSeriesFrame::new(hours(3), vec![Channel::dense("swh", &[1.0, 2.0])], "swh");
        assert!(matches!(err, Err(Error::Schema(_))));
        let err = TimeSeriesFrame::new(hours(2), vec![Channel::dense("swh", &[1.0, 2.0])], "hs");
        assert!(matches!(err, Err(Error::Schema(_))));
    }

    #[test]
    fn reorder_keeps_target() {
        let frame = TimeSeriesFrame::new(
            hours(2),
            vec![Channel::dense("swh", &[1.0, 2.0]), Channel::dense("wspd", &[5.0, 6.0])],
            "swh",
        )
        .unwrap();
        let swapped = frame.reorder_channels(&["wspd", "swh"]).unwrap();
        assert_eq!(swapped.target_index(), 1);
        assert_eq!(swapped.target().name, "swh");
    }
}
