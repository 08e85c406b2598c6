use std::io::{Read, Write};

use super::TrainError;

pub const CSV_HEADER: [&str; 5] = ["batch", "stage", "unfrozen_groups", "train_loss", "val_loss"];

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub batch: usize,
    pub stage: usize,
    pub unfrozen_groups: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub records: Vec<LogRecord>,
    pub unfreeze_events: Vec<usize>,
}

/// Mean train loss just before and just after one unfreeze event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    pub batch: usize,
    pub before: f64,
    pub after: f64,
}

impl Spike {
    pub fn is_spike(&self) -> bool {
        self.after > self.before
    }
}

impl TrainLog {
    pub fn push(&mut self, record: LogRecord) {
        if let Some(last) = self.records.last() {
            debug_assert!(record.batch > last.batch);
            if record.unfrozen_groups > last.unfrozen_groups {
                self.unfreeze_events.push(record.batch);
            }
        }
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_train_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.train_loss)
    }

    pub fn last_val_loss(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.val_loss)
    }

    /// Compares the `window` batches before each unfreeze event with the
    /// `window` batches starting at it. Events without a full window on both
    /// sides are skipped.
    pub fn spikes(&self, window: usize) -> Vec<Spike> {
        let mean = |rs: &[LogRecord]| rs.iter().map(|r| r.train_loss).sum::<f64>() / rs.len() as f64;
        self.unfreeze_events
            .iter()
            .filter_map(|&b| {
                let i = self.records.iter().position(|r| r.batch == b)?;
                if window == 0 || i < window || i + window > self.records.len() {
                    return None;
                }
                Some(Spike { batch: b, before: mean(&self.records[i - window..i]), after: mean(&self.records[i..i + window]) })
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TrainError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            let val = r.val_loss.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                r.batch.to_string(),
                r.stage.to_string(),
                r.unfrozen_groups.to_string(),
                r.train_loss.to_string(),
                val,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TrainError> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(TrainError::LogFormat(format!("unexpected header {}", header.join(","))));
        }
        let mut log = TrainLog::default();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let bad = |what: &str| TrainError::LogFormat(format!("row {}: bad {what}", line + 2));
            let int = |i: usize, what: &str| field(i).parse::<usize>().map_err(|_| bad(what));
            let record = LogRecord {
                batch: int(0, "batch")?,
                stage: int(1, "stage")?,
                unfrozen_groups: int(2, "unfrozen_groups")?,
                train_loss: field(3).parse().map_err(|_| bad("train_loss"))?,
                val_loss: match field(4) {
                    "" => None,
                    v => Some(v.parse().map_err(|_| bad("val_loss"))?),
                },
            };
            if log.records.last().is_some_and(|l| l.batch >= record.batch) {
                return Err(bad("batch order"));
            }
            log.push(record);
        }
        Ok(log)
    }
}
