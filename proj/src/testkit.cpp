#include "lcr/testkit.hpp"

#include "lcr/error.hpp"
#include "lcr/text.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

namespace lcr::testkit {

namespace {

struct Level {
    std::vector<std::string> phrases;
    PrisonTerm term;
    long lo = 0;  // range of {A}/{N} for this level
    long hi = 0;
};

struct ChargeTemplate {
    std::string name;
    std::vector<ArticleId> main;  // primary, alternate
    std::vector<std::string> openings;
    std::vector<Level> levels;
    std::vector<std::string> details;
};

struct Circumstance {
    ArticleId article;
    std::string citation_suffix;  // e.g. 第一款
    std::vector<std::string> sentences;
    std::string remark;
};

// Placeholders: {P} defendant, {V} victim, {R} road, {L} district,
// {C} company, {T} date and hour, {A}/{N} level-bound number, {M} free amount.
const std::vector<ChargeTemplate>& charge_table()
{
    static const std::vector<ChargeTemplate> table = {
        {"交通肇事罪",
         {{133, 0}, {134, 0}},
         {"{T}，{P}驾驶小型轿车沿{R}由东向西行驶时未注意观察路面情况，与横过道路的行人{V}相撞，",
          "{T}，{P}驾驶重型货车行经{R}路口时违反交通信号灯指示通行，与{V}驾驶的电动自行车发生碰撞，"},
         {{{"致{V}受重伤", "造成{V}重伤且车辆严重损坏", "{V}被撞倒在地，经鉴定构成重伤", "致使对方颅骨骨折、多根肋骨断裂"}, PrisonTerm::fixed(10)},
          {{"致{V}经抢救无效死亡", "造成{V}当场死亡", "{V}送医后伤势过重不治，经鉴定系颅脑损伤身亡", "致一名行人失去生命"}, PrisonTerm::fixed(24)},
          {{"致{V}死亡后驾车逃逸", "造成{V}死亡，{P}随即弃车逃离现场", "撞击致人身亡后{P}驶离现场躲避追查", "肇事后逃跑，致使{V}得不到救助而身亡"}, PrisonTerm::fixed(40)},
          {{"致{V}及另外两名行人死亡", "造成三人死亡、一人重伤的严重后果", "酿成重大事故，经鉴定共有三名遇难者", "致车上乘客四人遇难"}, PrisonTerm::fixed(84)}},
         {"经鉴定，{P}负事故的全部责任。", "经鉴定，{P}驾驶的车辆制动性能不合格。"}},
        {"危险驾驶罪",
         {{133, 1}, {134, 1}},
         {"{T}，{P}饮酒后驾驶小型轿车行驶至{R}时被执勤民警当场查获，",
          "{T}，{P}酒后驾驶摩托车沿{R}行驶，在接受检查时被民警查获，"},
         {{{"经鉴定其血液中乙醇含量为{N}mg/100ml", "经抽血鉴定乙醇含量为{N}mg/100ml", "呼气检测后经鉴定酒精浓度达{N}mg/100ml", "送检血样经鉴定每百毫升含酒精{N}毫克"}, PrisonTerm::detention(2), 80, 130},
          {{"经鉴定其血液中乙醇含量为{N}mg/100ml，属严重醉酒", "经抽血鉴定乙醇含量高达{N}mg/100ml", "执勤人员发现其步态不稳，经鉴定酒精浓度达{N}mg/100ml", "送检血样经鉴定每百毫升含酒精{N}毫克，已处于深度醉酒状态"},
           PrisonTerm::detention(4), 180, 260},
          {{"并撞坏路边停放的车辆，经鉴定其血液中乙醇含量为{N}mg/100ml", "途中致护栏损坏，乙醇含量为{N}mg/100ml", "行驶中剐蹭多辆汽车，事后经鉴定酒精浓度达{N}mg/100ml", "冲上人行道撞毁路灯杆，送检血样经鉴定每百毫升含酒精{N}毫克"},
           PrisonTerm::detention(6), 200, 320}},
         {"经查，{P}未取得机动车驾驶证。", "经查，{P}所驾车辆未按规定登记。"}},
        {"盗窃罪",
         {{264, 0}, {265, 0}},
         {"{T}，{P}趁无人之机进入{C}仓库，窃取", "{T}，{P}在{R}附近撬开{V}停放的车辆车门，窃取"},
         {{{"财物价值人民币{A}元", "现金及香烟等物品共计价值人民币{A}元", "窃得零钱若干及副食品，合计{A}元", "偷走一辆旧自行车，经鉴定值{A}元"}, PrisonTerm::fine_only(), 1000, 2500},
          {{"手机、现金等财物价值人民币{A}元，数额较大", "笔记本电脑等物品共计价值人民币{A}元，数额较大", "盗走平板电脑一台，经价格认定为{A}元", "窃得电动车电瓶若干，合计{A}元"},
           PrisonTerm::fixed(10), 3000, 20000},
          {{"财物价值人民币{A}元，数额巨大", "金银首饰等物品共计价值人民币{A}元，数额巨大", "盗走保险柜内存放的{A}元现金", "窃得黄金饰品若干，经价格认定为{A}元"}, PrisonTerm::fixed(42), 40000,
           150000},
          {{"财物价值人民币{A}元，数额特别巨大", "名贵字画等物品共计价值人民币{A}元，数额特别巨大", "盗走一辆高档越野车，经价格认定为{A}元", "窃取仓库内整批精密仪器，合计{A}元"},
           PrisonTerm::fixed(126), 400000, 900000}},
         {"经鉴定，涉案手机系{V}所有。", "{P}将赃物变卖后得款共计人民币{M}元。"}},
        {"故意伤害罪",
         {{234, 0}, {235, 0}},
         {"{T}，{P}在{R}一烧烤店门口因琐事与{V}发生争执，随后持木棍殴打{V}，",
          "{T}，{P}与{V}因债务纠纷在{C}办公室内发生口角，{P}用拳头击打{V}头部，"},
         {{{"经鉴定致{V}轻伤二级", "造成{V}面部多处挫伤，经鉴定为轻伤二级", "致使对方鼻骨骨折，法医认定属于轻伤二级", "打得{V}眼眶淤肿、牙齿松动，造成轻伤二级"}, PrisonTerm::fixed(8)},
          {{"经鉴定致{V}轻伤一级", "造成{V}肋骨骨折，经鉴定为轻伤一级", "致使对方手臂骨折，法医认定属于轻伤一级", "打得{V}耳膜穿孔、门牙脱落，造成轻伤一级"}, PrisonTerm::fixed(12)},
          {{"经鉴定致{V}重伤二级", "造成{V}脾脏破裂，经鉴定为重伤二级", "致使对方肝脏挫裂，法医认定属于重伤二级", "打得{V}腰椎爆裂、卧床不起，造成重伤二级"}, PrisonTerm::fixed(36)},
          {{"致{V}重伤一级并造成严重残疾", "造成{V}颅脑损伤，经鉴定为重伤一级", "致使对方双目失明，法医认定属于重伤一级", "打得{V}高位截瘫、终身残疾，造成重伤一级"}, PrisonTerm::life()}},
         {"经鉴定，{V}的损伤系钝器作用所致。", "{V}为治疗伤情共计花费医疗费人民币{M}元。"}},
        {"诈骗罪",
         {{266, 0}, {287, 0}},
         {"{T}起，{P}冒充{C}工作人员，以办理贷款为由", "{T}起，{P}虚构投资项目并以高额回报为诱饵，"},
         {{{"骗取{V}人民币{A}元", "先后骗取{V}人民币{A}元", "让{V}转账交付了{A}元", "从{V}处诓得{A}元"}, PrisonTerm::fixed(6), 3000, 9000},
          {{"先后骗取{V}等人共计人民币{A}元，数额巨大", "骗取{V}交付的保证金共计人民币{A}元，数额巨大", "诱使十余人陆续汇出款项合计{A}元", "从{V}处诓得巨款{A}元"},
           PrisonTerm::fixed(36), 50000, 200000},
          {{"骗取多名被害人共计人民币{A}元，数额特别巨大", "骗取四十余名被害人共计人民币{A}元，数额特别巨大", "诱使上百人陆续汇出款项合计{A}元", "在全国各地诓得钱款合计{A}元"},
           PrisonTerm::fixed(132), 600000, 2000000}},
         {"经查，{P}将骗得款项用于偿还个人债务。", "经查，涉案银行账户均由{P}实际控制。"}},
        {"抢劫罪",
         {{263, 0}, {269, 0}},
         {"{T}，{P}在{R}一偏僻路段拦住下班回家的{V}，", "{T}，{P}尾随{V}至{R}附近，"},
         {{{"以暴力威胁抢得现金人民币{A}元", "采用推搡等手段抢走{V}现金人民币{A}元", "强行夺下{V}的挎包，包内有{A}元", "掐住{V}脖子逼其交出{A}元"}, PrisonTerm::fixed(36), 300, 2000},
          {{"持刀抢走{V}手机及现金共计价值人民币{A}元，并致{V}轻伤", "持刀威胁并致{V}轻伤，抢得财物价值人民币{A}元", "用匕首划伤{V}手臂后夺走钱包，内有{A}元", "挥舞砍刀逼迫{V}交出财物，致其手部轻伤，损失{A}元"},
           PrisonTerm::fixed(66), 2000, 8000},
          {{"随后持刀闯入{V}住处抢得财物价值人民币{A}元，属入户抢劫", "尾随进入{V}家中抢得财物价值人民币{A}元，属入户抢劫", "破门进入民宅后捆绑屋主，劫走{A}元", "冒充快递员骗开房门，在屋内劫得{A}元"},
           PrisonTerm::fixed(120), 5000, 30000},
          {{"在抢劫过程中持刀捅刺致{V}死亡", "因{V}反抗而将其殴打致死", "劫财时遭遇反抗，遂用利刃刺中{V}胸口致其身亡", "为劫取钱财将{V}活活勒毙，经鉴定系机械性窒息"}, PrisonTerm::death()}},
         {"经鉴定，被抢手机价值人民币{M}元。", "经查，{P}作案时携带了事先准备的折叠刀。"}},
        {"寻衅滋事罪",
         {{293, 0}, {290, 0}},
         {"{T}，{P}酒后在{R}一网吧内无故滋事，", "{T}，{P}纠集多人在{C}门口随意殴打过往群众，"},
         {{{"致{V}轻微伤", "将{V}推倒在地，致其轻微伤", "扇打{V}耳光，经鉴定属轻微伤", "揪扯{V}头发，致其面部擦伤"}, PrisonTerm::control(8)},
          {{"致{V}等二人轻伤", "用啤酒瓶击打{V}等人，致二人轻伤", "挥拳打伤路人两名，经鉴定均属轻伤", "持钢管追打顾客，致两人骨折"}, PrisonTerm::fixed(12)},
          {{"多次随意殴打他人并造成恶劣社会影响", "任意毁损店内财物并造成恶劣社会影响", "先后五次拦截学生索要钱物，共计得手{M}元", "长期在集市强拿硬要，致商户纷纷歇业"}, PrisonTerm::fixed(30)}},
         {"经鉴定，被毁损财物价值人民币{M}元。", "经查，{P}此前曾多次在该区域滋事。"}},
        {"贩卖毒品罪",
         {{347, 0}, {348, 0}},
         {"{T}，{P}在{R}一酒店房间内向{V}出售", "{T}，{P}在{R}附近以人民币{M}元的价格向他人贩卖"},
         {{{"经鉴定净重{N}克的甲基苯丙胺", "经鉴定为甲基苯丙胺的晶体{N}克", "冰毒一小包，经鉴定重{N}克", "几粒麻古，经鉴定重{N}克"}, PrisonTerm::fixed(8), 1, 9},
          {{"甲基苯丙胺共计{N}克", "经鉴定为甲基苯丙胺的毒品共计{N}克", "冰毒数包，经鉴定合计重{N}克", "成袋麻古，经鉴定合计重{N}克"}, PrisonTerm::fixed(48), 12, 45},
          {{"海洛因共计{N}克，数量大", "经鉴定为海洛因的毒品共计{N}克，数量大", "白粉数十包，经鉴定合计重{N}克", "成块黄皮，经鉴定合计重{N}克"}, PrisonTerm::fixed(180), 60, 300},
          {{"甲基苯丙胺共计{N}克，数量巨大", "经鉴定为甲基苯丙胺的毒品共计{N}克，数量巨大", "整箱冰毒，经鉴定合计重{N}克", "藏于货车夹层中的麻古，经鉴定合计重{N}克"}, PrisonTerm::death(), 1200,
           3000}},
         {"经查，{P}系通过网络联系购毒人员。", "公安机关从{P}住处查获电子秤等物品，经鉴定均检出毒品成分。"}},
        {"开设赌场罪",
         {{303, 0}, {304, 0}},
         {"{T}起，{P}在{L}一出租屋内开设赌场并组织他人赌博，", "{T}起，{P}通过网络平台开设赌场，招揽他人参赌，"},
         {{{"抽头渔利共计人民币{A}元", "从中获利共计人民币{A}元", "收取台费{A}元", "按每局提成方式获取{A}元"}, PrisonTerm::fixed(6), 5000, 20000},
          {{"抽头渔利共计人民币{A}元，情节严重", "非法获利共计人民币{A}元，情节严重", "雇佣多名荷官收取台费{A}元", "组织百余人参赌并提成{A}元"}, PrisonTerm::fixed(36), 60000,
           200000},
          {{"赌资累计达人民币{A}元，情节特别严重", "参赌资金共计人民币{A}元，情节特别严重", "吸纳全国各地赌客下注流水{A}元", "设立多级代理发展会员，下注流水{A}元"}, PrisonTerm::fixed(72),
           3000000, 9000000}},
         {"经查，{P}雇佣{V}负责望风。", "公安机关现场查获赌资共计人民币{M}元。"}},
        {"故意杀人罪",
         {{232, 0}, {233, 0}},
         {"{T}，{P}因感情纠纷在{R}一出租屋内持刀捅刺{V}，", "{T}，{P}因经济纠纷对{V}怀恨在心，在{R}持铁锤击打{V}头部，"},
         {{{"致{V}重伤后被群众制止", "造成{V}重伤，后因他人阻拦未能得逞", "刺中{V}腹部数刀，经鉴定构成重伤，后被路人夺下凶器", "险些致{V}丧命，经抢救保住性命但构成重伤"}, PrisonTerm::fixed(96)},
          {{"致{V}死亡，后{P}主动拨打急救电话", "造成{V}经抢救无效死亡", "致{V}当晚身亡，后{P}在现场等候警察到来", "刺中要害致{V}殒命，事后{P}留在原地未逃离"}, PrisonTerm::life()},
          {{"致{V}当场死亡，后又焚烧现场", "连续击打致{V}当场死亡，手段特别残忍", "连砍数十刀致{V}身亡后分尸抛弃", "杀害{V}后又将其幼子一并杀死，经鉴定均系锐器伤致死"}, PrisonTerm::death()}},
         {"经鉴定，{V}系被锐器刺破心脏致失血性休克。", "经鉴定，{P}作案时具有完全刑事责任能力。"}},
        {"职务侵占罪",
         {{271, 0}, {272, 0}},
         {"{T}起，{P}利用担任{C}出纳的职务便利，", "{T}起，{P}在担任{C}销售经理期间利用职务上的便利，"},
         {{{"侵占公司货款共计人民币{A}元，案发前已全部退还", "截留客户货款共计人民币{A}元，案发前已全部退还", "挪走公款{A}元后自行悉数归还", "私吞回款{A}元，东窗事发前补足了账目"},
           PrisonTerm::exempt(), 60000, 100000},
          {{"侵占公司资金共计人民币{A}元", "将应收账款共计人民币{A}元据为己有", "私吞回款{A}元用于个人消费", "将收取的押金{A}元据为己有"}, PrisonTerm::fixed(10), 100000, 500000},
          {{"将公司资金共计人民币{A}元转入个人账户，数额巨大", "侵吞公司财物共计价值人民币{A}元，数额巨大", "分多次私吞回款{A}元购置房产", "伪造报销凭证套取公款{A}元"},
           PrisonTerm::fixed(60), 1000000, 5000000}},
         {"经查，{P}采用虚开单据的方式掩盖侵占行为。", "经审计，公司账目短缺共计人民币{M}元。"}},
        {"非法拘禁罪",
         {{238, 0}, {239, 0}},
         {"{T}，{P}为索要债务将{V}强行带至{R}一宾馆房间内，", "{T}，{P}伙同他人将{V}拘禁于{C}仓库内，"},
         {{{"拘禁{V}长达{N}小时，致其轻微伤", "限制{V}人身自由{N}小时，致其轻微伤", "关押{V}{N}小时，经鉴定属轻微伤", "扣留{V}{N}小时，期间推搡致其擦伤"}, PrisonTerm::detention(5), 10, 30},
          {{"非法拘禁{V}{N}小时并致其轻伤", "限制{V}人身自由{N}小时，期间殴打致其轻伤", "关押{V}{N}小时，期间用皮带抽打，经鉴定属轻伤", "扣留{V}{N}小时，期间掌掴致其鼓膜穿孔"}, PrisonTerm::fixed(18), 30,
           60},
          {{"期间多次殴打{V}，致其重伤", "期间对{V}进行捆绑殴打，造成其重伤", "关押期间将{V}吊起殴打，经鉴定属重伤", "逼债过程中用铁棍击打{V}，致其脾脏摘除"}, PrisonTerm::fixed(48)}},
         {"经查，{P}与{V}之间存在民间借贷纠纷。", "经鉴定，{V}身体多处存在约束性伤痕。"}},
    };
    return table;
}

const std::vector<Circumstance>& circumstances()
{
    static const std::vector<Circumstance> list = {
        {{67, 0},
         "第一款",
         {"案发后，{P}主动到公安机关投案，并如实供述了自己的罪行。", "{P}经电话通知后主动投案，到案后如实供述犯罪事实。"},
         "{P}有自首情节，依法可以从轻处罚。"},
        {{68, 0},
         "",
         {"到案后，{P}检举他人犯罪线索，经查证属实。", "羁押期间，{P}揭发同监室人员的犯罪行为，经查属实。"},
         "{P}有立功表现，可以从轻处罚。"},
        {{65, 0},
         "第一款",
         {"经查，{P}曾因犯罪被判处有期徒刑，刑满释放后五年内再犯。", "经查，{P}前罪刑罚执行完毕未满五年。"},
         "{P}系累犯，应当从重处罚。"},
        {{64, 0},
         "",
         {"案发后，{P}退赔被害人经济损失共计人民币{M}元。", "{P}的家属代为退赔被害人损失共计人民币{M}元。"},
         "{P}已退赔被害人损失，可以酌情从轻处罚。"},
        {{27, 0},
         "",
         {"经查，{P}在共同犯罪中起次要作用，系从犯。", "经查，{P}仅负责接送同案人员，在共同犯罪中作用较小。"},
         "{P}系从犯，应当从轻处罚。"},
    };
    return list;
}

const std::vector<std::string>& fillers()
{
    static const std::vector<std::string> list = {
        "{P}系本地常住居民，平时以打零工为生。",
        "{P}案发前在一家物流公司从事搬运工作。",
        "案发当天天气晴朗，现场周边人员往来较多。",
        "公安机关接到报警后迅速出警并依法开展调查。",
        "侦查人员对现场进行了勘验并提取了相关物证。",
        "多名证人的证言相互印证，能够证明案件基本情况。",
        "{P}到案后对指控的主要事实未提出异议。",
        "案发地点附近安装有监控设备，相关视频已依法调取。",
        "{P}的家属在庭审期间到庭旁听。",
        "公诉机关当庭出示了书证、物证和现场照片等证据。",
        "被害人家属当庭表示希望依法处理。",
        "辩护人提出{P}认罪态度较好的辩护意见。",
        "案件审理过程中，合议庭依法听取了各方意见。",
        "该路段平时车流量较大，夜间照明条件一般。",
        "{P}与被害人此前并不相识。",
        "现场勘验笔录记载了案发地点的具体方位。",
        "{P}归案后被依法刑事拘留，后被逮捕。",
        "案发后双方未能就赔偿问题达成协议。",
        "侦查机关依法调取了通话记录和银行流水。",
        "{P}平时与邻里关系较为融洽。",
        "法院依法组成合议庭，公开开庭审理了本案。",
        "{P}在庭审中表示愿意接受法律的处罚。",
        "案卷材料显示，案发时段现场并无其他可疑人员。",
        "公安机关制作了辨认笔录，辨认过程符合法律规定。",
        "{P}的辩护人当庭提交了社区出具的表现证明。",
        "庭审中，公诉人对各项证据逐一进行了说明。",
    };
    return list;
}

const std::vector<std::string>& backgrounds()
{
    static const std::vector<std::string> list = {
        "{D}，被告人{P}在{L}与朋友聚会。",
        "{D}，被告人{P}独自前往{L}办事。",
        "被告人{P}自{D}起在{L}居住。",
        "{D}下午，被告人{P}乘车到达{L}。",
    };
    return list;
}

std::vector<std::string> chinese_people()
{
    std::vector<std::string> out;
    for (const auto& n : Lexicon::gazetteer().entries.at(EntityCategory::person)) {
        if (static_cast<unsigned char>(n[0]) >= 0x80) out.push_back(n);
    }
    return out;
}

std::vector<std::string> districts()
{
    std::vector<std::string> out;
    for (const auto& l : Lexicon::gazetteer().entries.at(EntityCategory::location)) {
        if (l.find("区") != std::string::npos) out.push_back(l);
    }
    return out;
}

std::vector<std::string> roads()
{
    std::vector<std::string> out;
    for (const auto& l : Lexicon::gazetteer().entries.at(EntityCategory::location)) {
        if (l.find("区") == std::string::npos) out.push_back(l);
    }
    return out;
}

using Rng = std::mt19937_64;

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng)
{
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

long uniform(long lo, long hi, Rng& rng) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

struct Slots {
    std::map<char, std::string> values;

    std::string fill(const std::string& tpl) const
    {
        std::string out;
        out.reserve(tpl.size() + 32);
        for (std::size_t i = 0; i < tpl.size(); ++i) {
            if (tpl[i] == '{' && i + 2 < tpl.size() && tpl[i + 2] == '}') {
                auto it = values.find(tpl[i + 1]);
                if (it != values.end()) {
                    out += it->second;
                    i += 2;
                    continue;
                }
            }
            out += tpl[i];
        }
        return out;
    }
};

std::string article_text(const ArticleId& a)
{
    std::string s = "第" + chinese_numeral(a.number) + "条";
    if (a.sub > 0) s += "之" + chinese_numeral(a.sub);
    return s;
}

std::string case_id(char prefix, std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%06zu", prefix, i);
    return buf;
}

std::string date_text(Rng& rng)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%ld年%ld月%ld日", uniform(2012, 2021, rng), uniform(1, 12, rng), uniform(1, 28, rng));
    return buf;
}

std::string fine_text(Rng& rng) { return chinese_numeral(static_cast<int>(uniform(1, 9, rng)) * 1000) + "元"; }

std::string sentence_text(const PrisonTerm& t, Rng& rng)
{
    switch (t.kind) {
    case TermKind::death: return "判处死刑，剥夺政治权利终身";
    case TermKind::life: return "判处无期徒刑，剥夺政治权利终身";
    case TermKind::fixed_term: return "判处有期徒刑" + chinese_duration(t.months) + "，并处罚金人民币" + fine_text(rng);
    case TermKind::detention: return "判处拘役" + chinese_duration(t.months) + "，并处罚金人民币" + fine_text(rng);
    case TermKind::control: return "判处管制" + chinese_duration(t.months);
    case TermKind::fine_only: return "单处罚金人民币" + fine_text(rng);
    case TermKind::exempt: return "免予刑事处罚";
    }
    return {};
}

std::string citation(const std::vector<std::string>& parts)
{
    std::string s = "依照《中华人民共和国刑法》";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += "、";
        s += parts[i];
    }
    return s + "之规定，判决如下。";
}

Slots draw_slots(Rng& rng, const std::vector<std::string>& people, const std::vector<std::string>& places,
                 const std::vector<std::string>& streets)
{
    Slots s;
    const auto& companies = Lexicon::gazetteer().entries.at(EntityCategory::company);
    s.values['P'] = pick(people, rng);
    do {
        s.values['V'] = pick(people, rng);
    } while (s.values['V'] == s.values['P']);
    s.values['L'] = pick(places, rng);
    s.values['R'] = pick(streets, rng);
    s.values['C'] = pick(companies, rng);
    s.values['D'] = date_text(rng);
    s.values['T'] = s.values['D'] + std::to_string(uniform(1, 23, rng)) + "时许";
    s.values['M'] = std::to_string(uniform(2, 99, rng) * 100);
    return s;
}

void pad_fact(std::string& fact, const Slots& slots, std::size_t min_chars, Rng& rng)
{
    while (text::char_count(fact) < min_chars) fact += slots.fill(pick(fillers(), rng));
}

}  // namespace

std::size_t SyntheticSpec::max_charges() { return charge_table().size(); }

std::string chinese_numeral(int n)
{
    static const char* digits[] = {"零", "一", "二", "三", "四", "五", "六", "七", "八", "九"};
    static const char* units[] = {"", "十", "百", "千"};
    if (n < 0 || n > 9999) fail(ErrorKind::usage, "numeral out of range: " + std::to_string(n));
    if (n == 0) return digits[0];
    int d[4] = {n / 1000 % 10, n / 100 % 10, n / 10 % 10, n % 10};
    std::string out;
    bool pending_zero = false;
    for (int i = 0; i < 4; ++i) {
        if (d[i] == 0) {
            if (!out.empty()) pending_zero = true;
            continue;
        }
        if (pending_zero) out += digits[0];
        pending_zero = false;
        // 10..19 read as 十X, not 一十X.
        if (!(out.empty() && i == 2 && d[i] == 1)) out += digits[d[i]];
        out += units[3 - i];
    }
    return out;
}

std::string chinese_duration(int months)
{
    std::string out;
    if (months >= 12) out += chinese_numeral(months / 12) + "年";
    if (months % 12 != 0 || months == 0) out += chinese_numeral(months % 12) + "个月";
    return out;
}

SyntheticCorpus generate_corpus(const SyntheticSpec& spec)
{
    const auto& table = charge_table();
    if (spec.charge_count == 0 || spec.charge_count > table.size())
        fail(ErrorKind::usage, "charge_count must be in [1, " + std::to_string(table.size()) + "]");
    if (spec.articles_per_charge < 1 || spec.articles_per_charge > 2)
        fail(ErrorKind::usage, "articles_per_charge must be 1 or 2");
    if (spec.severity_levels == 0) fail(ErrorKind::usage, "severity_levels must be positive");
    if (spec.filler_min > spec.filler_max) fail(ErrorKind::usage, "filler_min > filler_max");

    const auto people = chinese_people();
    const auto places = districts();
    const auto streets = roads();
    const auto& circ = circumstances();

    SyntheticCorpus out;
    out.docs.reserve(spec.n_cases + spec.n_rulings + spec.n_short_facts);

    for (std::size_t i = 0; i < spec.n_cases; ++i) {
        // Per-case seeds keep each case independent of generation order.
        const std::string id = case_id('c', i);
        Rng rng(text::derive_seed(spec.seed, id));
        const std::size_t ci = i % spec.charge_count;
        const auto& ch = table[ci];
        const std::size_t levels = std::min(spec.severity_levels, ch.levels.size());
        const std::size_t severity = static_cast<std::size_t>(uniform(0, static_cast<long>(levels) - 1, rng));
        const auto& level = ch.levels[severity];

        Slots slots = draw_slots(rng, people, places, streets);
        if (level.hi > 0) {
            auto v = std::to_string(uniform(level.lo, level.hi, rng));
            slots.values['A'] = v;
            slots.values['N'] = v;
        }

        std::vector<std::string> key;
        key.push_back(slots.fill(pick(ch.openings, rng) + pick(level.phrases, rng) + "。"));
        if (std::bernoulli_distribution(0.5)(rng)) key.push_back(slots.fill(pick(ch.details, rng)));

        std::vector<std::size_t> chosen;
        if (std::bernoulli_distribution(spec.circumstance_rate)(rng)) {
            std::vector<std::size_t> idx(circ.size());
            for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
            std::shuffle(idx.begin(), idx.end(), rng);
            std::size_t n = std::bernoulli_distribution(0.3)(rng) ? 2 : 1;
            chosen.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
            std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
                return circ[a].article > circ[b].article;
            });
            for (auto k : chosen) key.push_back(slots.fill(pick(circ[k].sentences, rng)));
        }

        // Interleave fillers while keeping the key sentences in order.
        std::size_t n_fill = static_cast<std::size_t>(
            uniform(static_cast<long>(spec.filler_min), static_cast<long>(spec.filler_max), rng));
        std::vector<int> layout(key.size(), 1);
        layout.insert(layout.end(), n_fill, 0);
        std::shuffle(layout.begin(), layout.end(), rng);
        std::string fact = slots.fill(pick(backgrounds(), rng));
        std::size_t next_key = 0;
        for (int slot : layout) fact += slot ? key[next_key++] : slots.fill(pick(fillers(), rng));
        pad_fact(fact, slots, 120, rng);

        LegalElements el;
        el.charges = {ch.name};
        el.prison_term = level.term;
        std::vector<std::string> cited;
        for (std::size_t k = 0; k < spec.articles_per_charge; ++k) {
            el.main_articles.insert(ch.main[k]);
            cited.push_back(article_text(ch.main[k]));
        }
        std::string remarks;
        for (auto k : chosen) {
            el.ancillary_articles.insert(circ[k].article);
            cited.push_back(article_text(circ[k].article) + circ[k].citation_suffix);
            remarks += slots.fill(circ[k].remark);
        }

        CaseDocument doc;
        doc.case_id = id;
        doc.fact = std::move(fact);
        doc.reason = slots.fill("本院认为，被告人{P}的行为已构成" + ch.name + "，公诉机关指控的罪名成立。") + remarks
                     + citation(cited);
        doc.judgment = slots.fill("被告人{P}犯" + ch.name + "，") + sentence_text(level.term, rng) + "。";
        doc.charge_labels = {ch.name};

        CaseTruth truth;
        truth.elements = el;
        truth.charge_index = ci;
        truth.severity = severity;
        for (const auto& s : key) truth.key_events += s;
        const std::pair<char, EntityCategory> planted[] = {
            {'P', EntityCategory::person}, {'V', EntityCategory::person},  {'R', EntityCategory::location},
            {'L', EntityCategory::location}, {'C', EntityCategory::company},
        };
        for (auto [slot, cat] : planted) {
            const auto& v = slots.values.at(slot);
            if (truth.key_events.find(v) != std::string::npos) truth.planted.emplace_back(cat, v);
        }
        out.truth.emplace(doc.case_id, std::move(truth));
        out.docs.push_back(std::move(doc));
    }

    for (std::size_t i = 0; i < spec.n_rulings; ++i) {
        const auto& ch = table[i % spec.charge_count];
        Rng rng(text::derive_seed(spec.seed, case_id('r', i)));
        Slots slots = draw_slots(rng, people, places, streets);
        CaseDocument doc;
        doc.case_id = case_id('r', i);
        doc.doc_kind = DocKind::ruling;
        doc.fact = slots.fill("罪犯{P}因犯" + ch.name + "于{D}被判处有期徒刑"
                              + chinese_duration(static_cast<int>(uniform(2, 10, rng)) * 12) + "，现在{L}监狱服刑。");
        doc.fact += slots.fill("执行机关认为该犯在服刑期间遵守监规，接受教育改造，提请减刑。");
        pad_fact(doc.fact, slots, 120, rng);
        doc.reason = slots.fill("本院认为，罪犯{P}在服刑期间确有悔改表现。") + citation({article_text({78, 0})});
        doc.judgment = slots.fill("对罪犯{P}减去有期徒刑六个月。");
        out.expected_exclusions.emplace(doc.case_id, ExclusionReason::ruling);
        out.docs.push_back(std::move(doc));
    }

    for (std::size_t i = 0; i < spec.n_short_facts; ++i) {
        Rng rng(text::derive_seed(spec.seed, case_id('s', i)));
        Slots slots = draw_slots(rng, people, places, streets);
        CaseDocument doc;
        doc.case_id = case_id('s', i);
        doc.fact = slots.fill("{D}，被告人{P}在{L}窃取他人财物价值人民币") + std::to_string(uniform(3000, 9000, rng))
                   + "元。";
        doc.reason = slots.fill("本院认为，被告人{P}的行为已构成盗窃罪。") + citation({article_text({264, 0})});
        doc.judgment = slots.fill("被告人{P}犯盗窃罪，判处有期徒刑六个月。");
        out.expected_exclusions.emplace(doc.case_id, ExclusionReason::short_fact);
        out.docs.push_back(std::move(doc));
    }
    return out;
}

int agreement_label(const LegalElements& source, const LegalElements& candidate)
{
    bool main = source.main_articles == candidate.main_articles;
    bool term = source.prison_term == candidate.prison_term;
    if (main && term) return 3;
    if (main) return 2;
    if (term) return 1;
    return 0;
}

Fixture generate_qrels(const SyntheticCorpus& corpus, std::uint64_t seed, const QrelsSpec& spec)
{
    std::vector<std::string> ids;
    for (const auto& [id, _] : corpus.truth) ids.push_back(id);
    if (ids.empty()) fail(ErrorKind::empty_corpus, "no valid cases to build a fixture from");
    if (spec.n_queries > ids.size()) fail(ErrorKind::usage, "more queries than valid cases");
    if (spec.annotated > spec.pool_size) fail(ErrorKind::usage, "annotated exceeds pool_size");

    std::map<std::string, const CaseDocument*> docs;
    for (const auto& d : corpus.docs) docs.emplace(d.case_id, &d);

    Rng rng(seed);
    std::vector<std::string> sources = ids;
    std::shuffle(sources.begin(), sources.end(), rng);
    sources.resize(spec.n_queries);
    std::sort(sources.begin(), sources.end());

    OfflineTemplateClient client;
    DictionaryTagger tagger;
    Anonymizer anon{&tagger, &Lexicon::surrogates()};
    const auto tpl = PromptTemplate::standard();

    Fixture fx;
    const std::size_t pool_size = std::min(spec.pool_size, ids.size());
    for (const auto& src : sources) {
        auto q = generate_query(*docs.at(src), client, tpl, text::derive_seed(seed, src), {}, anon);
        const auto& el = corpus.truth.at(src).elements;

        std::vector<std::string> by_label[4];
        for (const auto& id : ids) {
            if (id == src) continue;
            by_label[agreement_label(el, corpus.truth.at(id).elements)].push_back(id);
        }
        for (auto& v : by_label) std::shuffle(v.begin(), v.end(), rng);

        std::vector<std::string> annotated = {src};
        std::size_t want[4] = {0, spec.label1, spec.label2, spec.label3};
        std::size_t taken[4] = {0, 0, 0, 0};
        for (int l = 3; l >= 1; --l) {
            taken[l] = std::min(want[l], by_label[l].size());
            annotated.insert(annotated.end(), by_label[l].begin(), by_label[l].begin() + static_cast<std::ptrdiff_t>(taken[l]));
        }
        // Fill the rest with label 0, then with whatever is left.
        for (int l : {0, 1, 2, 3}) {
            while (annotated.size() < std::min(spec.annotated, pool_size) && taken[l] < by_label[l].size())
                annotated.push_back(by_label[l][taken[l]++]);
        }
        std::vector<std::string> rest;
        for (int l = 0; l < 4; ++l) rest.insert(rest.end(), by_label[l].begin() + static_cast<std::ptrdiff_t>(taken[l]), by_label[l].end());
        std::shuffle(rest.begin(), rest.end(), rng);

        std::vector<std::string> pool = annotated;
        for (std::size_t k = 0; pool.size() < pool_size && k < rest.size(); ++k) pool.push_back(rest[k]);
        std::sort(pool.begin(), pool.end());

        for (const auto& id : annotated) fx.qrels.add(q.query_id, id, agreement_label(el, corpus.truth.at(id).elements));
        fx.pools.emplace(q.query_id, std::move(pool));
        fx.queries.push_back(std::move(q));
    }
    return fx;
}

}  // namespace lcr::testkit
