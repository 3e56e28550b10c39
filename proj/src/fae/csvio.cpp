#include "fae/csvio.hpp"

#include <sstream>

#include "fae/ioutil.hpp"

namespace fae {

void write_detection_csv(const DetectionResult& result,
                         const std::string& path) {
  std::ostringstream out;
  out << "series_id,t,timestamp,x,mu,sigma,score,flag\n";
  for (std::size_t i = 0; i < result.size(); ++i) {
    out << result.series_id << "," << result.t[i] << ","
        << result.timestamps[i] << "," << format_double(result.x[i]) << ","
        << format_double(result.mu[i]) << "," << format_double(result.sigma[i])
        << "," << format_double(result.score[i]) << ","
        << static_cast<int>(result.flag[i]) << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < history.epochs.size(); ++e) {
    out << e << "," << format_double(history.epochs[e].train_loss) << ","
        << format_double(history.epochs[e].val_loss) << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_leaderboard_csv(const std::vector<TrialResult>& leaderboard,
                           const std::string& path) {
  std::ostringstream out;
  out << "rank,T,J,gamma,m,U,val_loss,params\n";
  for (std::size_t i = 0; i < leaderboard.size(); ++i) {
    const TrialResult& r = leaderboard[i];
    out << i + 1 << "," << r.hyper.T << "," << r.hyper.J << ","
        << format_double(r.hyper.gamma) << "," << r.hyper.m << "," << r.hyper.U
        << "," << format_double(r.val_loss) << "," << r.params << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_zeroshot_csv(const std::vector<ZeroShotSeriesReport>& rows,
                        const std::string& path) {
  std::ostringstream out;
  out << "series_id,held_out,test_nll,coverage3,alpha,f1\n";
  for (const ZeroShotSeriesReport& row : rows) {
    out << row.series_id << "," << (row.held_out ? 1 : 0) << ","
        << format_double(row.test_nll) << "," << format_double(row.coverage3)
        << "," << format_double(row.alpha) << "," << format_double(row.f1)
        << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_latent_csv(const std::vector<AnnotatedRow>& rows,
                      const std::string& path) {
  std::ostringstream out;
  out << "series_id,t,timestamp,pc1,pc2,pc3,hour_bucket,weekend,day,radius\n";
  for (const AnnotatedRow& row : rows) {
    out << row.series_id << "," << row.t << "," << row.timestamp << ","
        << format_double(row.pc1) << "," << format_double(row.pc2) << ","
        << format_double(row.pc3) << "," << row.hour_bucket << ","
        << row.weekend << "," << row.day << "," << format_double(row.radius)
        << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_eval_csv(const std::vector<EvalRow>& rows, const std::string& path) {
  std::ostringstream out;
  out << "series_id,alpha,tp,fp,fn,tn,precision,recall,f1\n";
  for (const EvalRow& row : rows) {
    out << row.series_id << "," << format_double(row.alpha) << ","
        << row.report.tp << "," << row.report.fp << "," << row.report.fn << ","
        << row.report.tn << "," << format_double(row.report.precision) << ","
        << format_double(row.report.recall) << ","
        << format_double(row.report.f1) << "\n";
  }
  atomic_write_file(path, out.str());
}

}  // namespace fae
