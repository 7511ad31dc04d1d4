fn main() {
    use std::time::Instant;
    let c = solvlin::families::direct_sum(&[solvlin::families::sl2(3).unwrap(), solvlin::families::gamma(2,4).unwrap()]).unwrap();
    let t0 = Instant::now();
    let a = solvlin::action::ModuleAction::from_construction(&c, 1000000).unwrap();
    println!("close: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let _ = a.group.is_solvable();
    println!("solvable: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let f = a.group.fitting();
    println!("fitting (order {}): {:?}", f.order(), t0.elapsed());
    let t0 = Instant::now();
    let f2 = solvlin::verify::fitting_two(&a.group).unwrap();
    println!("fitting_two (order {}): {:?}", f2.order(), t0.elapsed());
    let t0 = Instant::now();
    let ns = a.group.normal_subgroups(64).unwrap();
    println!("normals ({}): {:?}", ns.len(), t0.elapsed());
    let t0 = Instant::now();
    let w = solvlin::verify::verify_theorem_a(&a, 64).unwrap();
    println!("thmA (k={}): {:?}", w.k_order, t0.elapsed());
}
