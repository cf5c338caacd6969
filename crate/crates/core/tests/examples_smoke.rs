//! Every crate example runs to completion.

trait Finished {
    fn finished(self);
}

impl Finished for () {
    fn finished(self) {}
}

impl<E: std::fmt::Debug> Finished for Result<(), E> {
    fn finished(self) {
        self.unwrap();
    }
}

macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            #![allow(dead_code)]
            include!(concat!("../examples/", $file));

            #[test]
            fn runs() {
                crate::Finished::finished(main());
            }
        }
    };
}

example!(closed_form_errors, "closed_form_errors.rs");
example!(sample_complexity_gap, "sample_complexity_gap.rs");
example!(self_training_samplers, "self_training_samplers.rs");
example!(irrelevant_unlabeled, "irrelevant_unlabeled.rs");
example!(trades_regularizer, "trades_regularizer.rs");
example!(robust_self_training, "robust_self_training.rs");
example!(randomized_smoothing, "randomized_smoothing.rs");
example!(experiment_csv, "experiment_csv.rs");
example!(statistics_toolkit, "statistics_toolkit.rs");
