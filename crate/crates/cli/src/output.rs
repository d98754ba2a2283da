use std::path::Path;

use crate::config::Scenario;

/// Gnuplot script plotting a sweep CSV: one panel for the steering
/// quantifiers, one for fidelities, with the classical limit drawn in.
pub fn gnuplot_script(csv_path: &Path, scenario: Scenario, png: &Path) -> String {
    let xlabel = match scenario {
        Scenario::Walkoff => "theta_HWP (deg)",
        Scenario::Werner => "p_noise",
    };
    let csv = csv_path.display();
    format!(
        r#"# columns: 1 param, 2 alpha, 3 beta, 4 avg_state_fidelity, 5 f_sc,
#          6 comp_fidelity, 7 discord, 8 steerable_weight, 9 track
set datafile separator ","
set key autotitle columnhead outside right
set terminal pngcairo size 1100,450
set output "{png}"
set multiplot layout 1,2
set xlabel "{xlabel}"
theory(col) = (strcol(9) eq "theory") ? column(col) : NaN
ideal(col) = (strcol(9) eq "ideal") ? column(col) : NaN

set title "steering quantifiers"
plot "{csv}" using 1:(theory(2)) with linespoints title "alpha", \
     "" using 1:(theory(3)) with linespoints title "beta", \
     "" using 1:(theory(7)) with linespoints title "discord", \
     "" using 1:(theory(8)) with linespoints title "SW", \
     "" using 1:(ideal(2)) with lines dashtype 2 title "alpha ideal", \
     "" using 1:(ideal(3)) with lines dashtype 2 title "beta ideal"

set title "fidelities"
plot "{csv}" using 1:(theory(4)) with linespoints title "F_s", \
     "" using 1:(theory(6)) with linespoints title "F_comp", \
     "" using 1:(theory(5)) with lines title "F_sc", \
     "" using 1:(ideal(4)) with lines dashtype 2 title "F_s ideal"
unset multiplot
"#,
        png = png.display()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_points_at_csv() {
        let s = gnuplot_script(Path::new("out/w.csv"), Scenario::Werner, Path::new("out/w.png"));
        assert!(s.contains("\"out/w.csv\""));
        assert!(s.contains("p_noise"));
        assert!(s.contains("set output \"out/w.png\""));
    }
}
