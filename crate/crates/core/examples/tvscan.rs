use partscape::dataset::PointSet;
use partscape::partition::enumerate_partitions;
use partscape::quality::{kernel_quality, KernelSpec};

fn tv_uniform(xs: &[f64], sigma: f64) -> f64 {
    let points = PointSet::new(xs.to_vec(), xs.len(), 1).unwrap();
    let kernel = KernelSpec::gaussian(sigma).unwrap();
    let all = enumerate_partitions(8, 2).unwrap();
    let w: Vec<f64> = all
        .iter()
        .map(|p| kernel_quality(p, &points, &kernel))
        .collect();
    let total: f64 = w.iter().sum();
    let u = 1.0 / all.len() as f64;
    w.iter().map(|&q| (q / total - u).abs()).sum::<f64>() / 2.0
}

fn main() {
    let geoms: Vec<(&str, Vec<f64>, f64)> = vec![
        ("orig sep6 sp0.5 s1", vec![0.0, 0.5, 1.0, 1.5, 6.0, 6.5, 7.0, 7.5], 1.0),
        ("tight sp0.2 s1", vec![0.0, 0.2, 0.4, 0.6, 6.0, 6.2, 6.4, 6.6], 1.0),
        ("tight sp0.2 s2", vec![0.0, 0.2, 0.4, 0.6, 6.0, 6.2, 6.4, 6.6], 2.0),
        ("sep3 sp0.2 s1.5", vec![0.0, 0.2, 0.4, 0.6, 3.0, 3.2, 3.4, 3.6], 1.5),
        ("sep2 sp0.1 s1", vec![0.0, 0.1, 0.2, 0.3, 2.0, 2.1, 2.2, 2.3], 1.0),
        ("sep4 sp0.1 s2", vec![0.0, 0.1, 0.2, 0.3, 4.0, 4.1, 4.2, 4.3], 2.0),
        ("sep5 sp0.3 s2.5", vec![0.0, 0.3, 0.6, 0.9, 5.0, 5.3, 5.6, 5.9], 2.5),
        ("6+2 sep5 s2", vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 5.0, 5.2], 2.0),
        ("sep8 sp0.2 s4", vec![0.0, 0.2, 0.4, 0.6, 8.0, 8.2, 8.4, 8.6], 4.0),
        ("sep10 sp0.5 s5", vec![0.0, 0.5, 1.0, 1.5, 10.0, 10.5, 11.0, 11.5], 5.0),
    ];
    for (name, xs, sigma) in geoms {
        println!("{name}: TV(pi, uniform) = {:.4}", tv_uniform(&xs, sigma));
    }
}
